"""Deterministic oracle function families for additive-noise models.

An oracle is a strictly monotonically increasing differentiable function
phi on [0, 1] with a closed-form derivative and inverse. Each family is
built from a raw generator f and optionally normalized so that

    phi(c) = (f(c) - f(0)) / (f(1) - f(0)),

giving phi(0) = 0 and phi(1) = 1 exactly. Inverses and derivatives are
closed-form per family (log for the exponential, arcsine for the sine
window, rational powers for power laws); no numeric root-finding happens
here, so downstream quadrature and Monte Carlo checks do not inherit
solver tolerances.

Inverse evaluation clamps its input into [phi(0), phi(1)] first: additive
noise can push observed effects outside the noiseless range, while the
inverse is only guaranteed on that range. ``inverse_with_flag`` reports
whether clamping occurred.

CLI tokens: ``linear``, ``exp:a=2``, ``sin-window``, ``pow:a=5``,
``spow:a=0.8,b=2``, each with an optional ``,norm`` suffix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import DomainError, InvalidParam

__all__ = [
    "OracleFunction", "Linear", "Exponential", "SineWindow", "Power",
    "ScaledPower", "parse_oracle", "ALL_FAMILIES",
]

_DOMAIN_TOL = 1e-12

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class OracleFunction:
    """Base class; subclasses provide the raw family forms.

    Fields
    ------
    normalized : apply the (f(c) - f(0)) / (f(1) - f(0)) rescaling
    domain     : closed evaluation interval, always [0, 1] here
    """

    normalized: bool = False
    domain: tuple[float, float] = (0.0, 1.0)

    # raw family forms, before normalization -------------------------------
    def _f(self, x):
        raise NotImplementedError

    def _df(self, x):
        raise NotImplementedError

    def _finv(self, y):
        raise NotImplementedError

    def _finv_domain(self) -> tuple[float, float]:
        """Interval of raw outputs where the closed-form inverse exists."""
        raise NotImplementedError

    @property
    def family(self) -> str:
        return type(self).__name__

    # normalization ---------------------------------------------------------
    def _span(self) -> float:
        lo, hi = self.domain
        return float(self._f(hi) - self._f(lo))

    def _check_domain(self, c):
        lo, hi = self.domain
        c = np.asarray(c, dtype=float)
        if np.any(c < lo - _DOMAIN_TOL) or np.any(c > hi + _DOMAIN_TOL):
            raise DomainError(
                f"input outside oracle domain [{lo}, {hi}]"
            )
        return np.clip(c, lo, hi)

    def eval(self, c: ArrayLike) -> ArrayLike:
        """phi(c); raises DomainError outside [0, 1] beyond 1e-12."""
        scalar = np.isscalar(c)
        x = self._check_domain(c)
        if self.normalized:
            out = (self._f(x) - self._f(self.domain[0])) / self._span()
        else:
            out = self._f(x)
        return float(out) if scalar else out

    def derivative(self, c: ArrayLike) -> ArrayLike:
        """Analytic phi'(c), strictly positive on the domain interior."""
        scalar = np.isscalar(c)
        x = self._check_domain(c)
        out = self._df(x)
        if self.normalized:
            out = out / self._span()
        return float(out) if scalar else out

    @property
    def range(self) -> tuple[float, float]:
        """(phi(0), phi(1)); equals (0, 1) when normalized."""
        lo, hi = self.domain
        return (self.eval(lo), self.eval(hi))

    def _inv(self, y):
        """Closed-form inverse in output units; y assumed valid."""
        if self.normalized:
            y = self._f(self.domain[0]) + np.asarray(y, dtype=float) * self._span()
        return self._finv(y)

    def inverse_with_flag(self, e: ArrayLike) -> tuple[ArrayLike, ArrayLike]:
        """phi^-1 with inputs clamped into [phi(0), phi(1)].

        Returns (values, clamped) where ``clamped`` marks inputs that were
        outside the range before clamping.
        """
        scalar = np.isscalar(e)
        y = np.asarray(e, dtype=float)
        lo, hi = self.range
        clamped = (y < lo) | (y > hi)
        out = self._inv(np.clip(y, lo, hi))
        if scalar:
            return float(out), bool(clamped)
        return out, clamped

    def inverse(self, e: ArrayLike) -> ArrayLike:
        """phi^-1(e); out-of-range inputs are clamped (see inverse_with_flag)."""
        return self.inverse_with_flag(e)[0]

    def inverse_extended(self, e: ArrayLike) -> ArrayLike:
        """phi^-1 on the whole validity domain of the closed-form inverse.

        Unlike ``inverse``, inputs beyond the noiseless range
        [phi(0), phi(1)] are still inverted as long as the formula exists
        there (the identity inverts everything, a power law everything
        nonnegative); only inputs outside the validity domain fall back
        to the clamped inverse. This is the right predictor when noisy
        effects legitimately leave the noiseless range.
        """
        scalar = np.isscalar(e)
        y = np.asarray(e, dtype=float)
        vlo, vhi = self.inverse_domain()
        with np.errstate(all="ignore"):
            out = np.asarray(self._inv(np.clip(y, vlo, vhi)), dtype=float)
        bad = ~np.isfinite(out)
        if np.any(bad):
            out = np.where(bad, np.asarray(self.inverse(y), dtype=float), out)
        if scalar:
            return float(out.ravel()[0]) if out.ndim else float(out)
        return out

    def inverse_derivative(self, e: ArrayLike) -> ArrayLike:
        """(phi^-1)'(e) = 1 / phi'(phi^-1(e))."""
        return 1.0 / self.derivative(self.inverse(e))

    def inverse_domain(self) -> tuple[float, float]:
        """Open interval of phi outputs where the closed-form inverse is
        mathematically defined, possibly infinite (identity: all of R).

        Noise policies use this to decide whether an effect value is valid
        with respect to the inverse.
        """
        lo, hi = self._finv_domain()
        if not self.normalized:
            return (lo, hi)
        f0 = self._f(self.domain[0])
        span = self._span()
        trans = lambda v: (v - f0) / span if math.isfinite(v) else math.copysign(math.inf, v)
        a, b = trans(lo), trans(hi)
        return (a, b) if a <= b else (b, a)

    def inverse_is_total(self) -> bool:
        lo, hi = self.inverse_domain()
        return math.isinf(lo) and lo < 0 and math.isinf(hi) and hi > 0

    def normalize(self) -> "OracleFunction":
        return replace(self, normalized=True)

    # CLI token -------------------------------------------------------------
    def _token_base(self) -> str:
        raise NotImplementedError

    def token(self) -> str:
        base = self._token_base()
        return base + ",norm" if self.normalized else base


@dataclass(frozen=True)
class Linear(OracleFunction):
    """f(x) = x; the identity, and the theorem's equality case."""

    def _f(self, x):
        return x

    def _df(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def _finv(self, y):
        return y

    def _finv_domain(self):
        return (-math.inf, math.inf)

    def _token_base(self):
        return "linear"


@dataclass(frozen=True)
class Exponential(OracleFunction):
    """f(x) = exp(a * x), a != 0.

    Normalized form expm1(a c)/expm1(a) is exact at both endpoints. The
    normalized inverse log1p(e * expm1(a))/a exists for
    e > -1/expm1(a) (a > 0), one-sided only: the family is the canonical
    case where noise below the range invalidates the inverse.
    """

    a: float = 1.0

    def __post_init__(self):
        if self.a == 0 or not math.isfinite(self.a):
            raise InvalidParam("Exponential requires a != 0")

    def _f(self, x):
        return np.exp(self.a * np.asarray(x, dtype=float))

    def _df(self, x):
        return self.a * np.exp(self.a * np.asarray(x, dtype=float))

    def _finv(self, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(y) / self.a

    def _finv_domain(self):
        # raw inverse log(y)/a needs y > 0
        return (0.0, math.inf)

    def _span(self):
        # same expm1 implementation as eval, so phi(1) is exactly 1
        return float(np.expm1(self.a))

    def eval(self, c):
        scalar = np.isscalar(c)
        x = self._check_domain(c)
        if self.normalized:
            out = np.expm1(self.a * x) / np.expm1(self.a)
        else:
            out = np.exp(self.a * x)
        return float(out) if scalar else out

    def _inv(self, y):
        y = np.asarray(y, dtype=float)
        if self.normalized:
            return np.log1p(y * np.expm1(self.a)) / self.a
        return np.log(y) / self.a

    def _token_base(self):
        return f"exp:a={self.a:g}"


_SIN_SCALE = 2.0 * math.pi / 360.0  # degrees expressed in radians


@dataclass(frozen=True)
class SineWindow(OracleFunction):
    """f(x) = sin((30 x + 25) * 2 pi / 360).

    The angle runs from 25 to 55 degrees, safely inside (0, 90), so f is
    strictly increasing with curvature milder than the exponentials.
    """

    def _theta(self, x):
        return (30.0 * np.asarray(x, dtype=float) + 25.0) * _SIN_SCALE

    def _f(self, x):
        return np.sin(self._theta(x))

    def _df(self, x):
        return 30.0 * _SIN_SCALE * np.cos(self._theta(x))

    def _finv(self, y):
        return (np.arcsin(y) / _SIN_SCALE - 25.0) / 30.0

    def _finv_domain(self):
        return (-1.0, 1.0)

    def _token_base(self):
        return "sin-window"


@dataclass(frozen=True)
class Power(OracleFunction):
    """f(x) = x^a, a > 0; already normalized on [0, 1].

    For a > 1 the slope vanishes at 0 and the inverse-slope functionals
    1/phi' blow up there; for a < 1 the slope diverges at 0 but the
    inverse-slope functionals stay integrable.
    """

    a: float = 1.0

    def __post_init__(self):
        if not (self.a > 0) or not math.isfinite(self.a):
            raise InvalidParam("Power requires a > 0")

    def _f(self, x):
        return np.power(np.asarray(x, dtype=float), self.a)

    def _df(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return self.a * np.power(x, self.a - 1.0)

    def _finv(self, y):
        return np.power(np.asarray(y, dtype=float), 1.0 / self.a)

    def _finv_domain(self):
        return (0.0, math.inf)

    def _token_base(self):
        return f"pow:a={self.a:g}"


@dataclass(frozen=True)
class ScaledPower(OracleFunction):
    """f(x) = a * x^b, a > 0, b > 0.

    The two-parameter power law used to model real-world pairs, where the
    scale a must be estimated because min-max normalization of noisy data
    only approximately normalizes the underlying function.
    """

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParam("ScaledPower requires a > 0 and b > 0")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidParam("ScaledPower parameters must be finite")

    def _f(self, x):
        return self.a * np.power(np.asarray(x, dtype=float), self.b)

    def _df(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return self.a * self.b * np.power(x, self.b - 1.0)

    def _finv(self, y):
        return np.power(np.asarray(y, dtype=float) / self.a, 1.0 / self.b)

    def _finv_domain(self):
        return (0.0, math.inf)

    def _token_base(self):
        return f"spow:a={self.a:g},b={self.b:g}"


ALL_FAMILIES = {
    "linear": Linear,
    "exp": Exponential,
    "sin-window": SineWindow,
    "pow": Power,
    "spow": ScaledPower,
}

_REQUIRED_PARAMS = {
    "linear": frozenset(),
    "exp": frozenset("a"),
    "sin-window": frozenset(),
    "pow": frozenset("a"),
    "spow": frozenset("ab"),
}


def _parse_params(text: str, token: str) -> dict:
    params = {}
    for part in text.split(","):
        if "=" not in part:
            raise InvalidParam(f"malformed oracle token {token!r}")
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in ("a", "b"):
            raise InvalidParam(f"unknown parameter {key!r} in {token!r}")
        try:
            params[key] = float(val)
        except ValueError:
            raise InvalidParam(
                f"non-numeric value for {key!r} in {token!r}"
            ) from None
    return params


def parse_oracle(token: str) -> OracleFunction:
    """Build an oracle from its CLI token, e.g. ``exp:a=1,norm``."""
    text = token.strip()
    normalized = False
    if text.endswith(",norm"):
        normalized = True
        text = text[: -len(",norm")]
    elif text == "norm":
        raise InvalidParam("bare 'norm' is not an oracle token")
    name, _, argtext = text.partition(":")
    name = name.strip()
    if name not in ALL_FAMILIES:
        raise InvalidParam(
            f"unknown oracle family {name!r}; expected one of "
            f"{sorted(ALL_FAMILIES)}"
        )
    cls = ALL_FAMILIES[name]
    params = _parse_params(argtext, token) if argtext else {}
    if set(params) != set(_REQUIRED_PARAMS[name]):
        raise InvalidParam(
            f"family {name!r} requires parameters "
            f"{sorted(_REQUIRED_PARAMS[name])}, got {sorted(params)}"
        )
    try:
        oracle = cls(normalized=normalized, **params)
    except TypeError:
        raise InvalidParam(
            f"family {name!r} does not accept parameters {sorted(params)}"
        ) from None
    return oracle


def split_oracle_tokens(text: str) -> list[str]:
    """Split a comma-separated oracle list, keeping parameter fragments
    (``a=...``, ``b=...``, ``norm``) attached to their token."""
    tokens: list[str] = []
    for frag in text.split(","):
        frag = frag.strip()
        if not frag:
            continue
        if tokens and (frag == "norm" or frag.startswith(("a=", "b="))):
            tokens[-1] += "," + frag
        else:
            tokens.append(frag)
    return tokens
