"""Analytic quantities of the additive-noise error-asymmetry theory.

Under the model e = phi(c) + n_e with E[n_e] = 0 and the independence
postulate Dep[phi', p(C)] = 0, where

    Dep[g, p] = int_0^1 g(c) p(c) dc - int_0^1 g(c) dc * int_0^1 p(c) dc,

the expected squared error of the oracle is Var[n_e] causally, and

    Var[n_e] * int_0^1 (1 / phi'(c))^2 p(c) dc

anticausally (first-order Taylor expansion of phi^-1 around the
noiseless effect, valid for sufficiently small noise). A Cauchy-Schwarz
chain bounds the anticausal integral below by 1 / (phi(1) - phi(0))^2,
with equality only for a linear oracle, which is the asymmetry: a range
not exceeding 1 forces the anticausal error to be at least the causal
one.

All integrals are evaluated by adaptive Gauss-Kronrod quadrature; for
strongly superlinear power oracles the inverse-slope integrands are not
integrable and the quadrature raises QuadratureFailure, which callers
should treat as "the Taylor bound diverges".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .datagen import NoiseSpec
from .errors import InvalidParam, QuadratureFailure, SingularSlope
from .oracle import OracleFunction
from .quadrature import integrate

__all__ = [
    "Density1D", "TheoryReport", "TheoremCheck", "dep_measure",
    "dep_inverse", "expected_causal_error", "expected_anticausal_error",
    "verify_theorem", "binary_conditionals",
]

QUAD_TOL = 1e-10          # delivered accuracy; the contract is 1e-8
QUAD_BUDGET = 100_000
_SLOPE_FLOOR = 1e-12
_DENSITY_CHECK_TOL = 1e-8


@dataclass(frozen=True)
class Density1D:
    """A strictly positive probability density on a closed interval.

    kind is "uniform", an analytic expression tag, or "pushforward"
    (the density of phi(C) induced from a cause density through a
    strictly increasing oracle: p_E(e) = p_C(phi^-1(e)) * (phi^-1)'(e)).
    """

    support: tuple[float, float]
    kind: str
    pdf: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.support
        if not (hi > lo):
            raise InvalidParam("density support must be a proper interval")

    def validate(self) -> float:
        """Check the density integrates to 1; returns the integral."""
        total = integrate(self.pdf, *self.support,
                          tol=_DENSITY_CHECK_TOL, max_nodes=QUAD_BUDGET).value
        if abs(total - 1.0) > 10 * _DENSITY_CHECK_TOL:
            raise InvalidParam(
                f"density {self.kind!r} integrates to {total!r}, not 1"
            )
        return total

    @classmethod
    def uniform(cls, support=(0.0, 1.0)) -> "Density1D":
        lo, hi = support
        h = 1.0 / (hi - lo)
        return cls(support=(float(lo), float(hi)), kind="uniform",
                   pdf=lambda x: np.full_like(np.asarray(x, dtype=float), h))

    @classmethod
    def exp_tilted(cls, a: float = 1.0) -> "Density1D":
        """p(c) = a e^{a c} / (e^a - 1) on [0, 1]; the push-forward of a
        uniform through the exponential family's inverse, and the standard
        dependent-density example."""
        if a == 0:
            return cls.uniform()
        z = math.expm1(a)
        pdf = lambda x: a * np.exp(a * np.asarray(x, dtype=float)) / z
        d = cls(support=(0.0, 1.0), kind="exp-tilt", pdf=pdf, params={"a": a})
        d.validate()
        return d

    @classmethod
    def power_tilted(cls, k: float) -> "Density1D":
        """p(c) = (k + 1) c^k on [0, 1], k > -1."""
        if k <= -1:
            raise InvalidParam("power tilt requires k > -1")
        pdf = lambda x: (k + 1.0) * np.power(np.asarray(x, dtype=float), k)
        return cls(support=(0.0, 1.0), kind="power-tilt", pdf=pdf,
                   params={"k": k})

    @classmethod
    def pushforward(cls, source: "Density1D", phi: OracleFunction) -> "Density1D":
        lo, hi = phi.range

        def pdf(e):
            c = phi.inverse(np.asarray(e, dtype=float))
            return source.pdf(c) / phi.derivative(c)

        return cls(support=(float(lo), float(hi)), kind="pushforward",
                   pdf=pdf, params={"source": source.kind})

    @classmethod
    def from_tag(cls, tag: str) -> "Density1D":
        """Parse a density token: ``uniform``, ``exp-tilt:a=1``,
        ``power-tilt:k=2``."""
        name, _, argtext = tag.strip().partition(":")
        args = {}
        for part in argtext.split(","):
            if not part:
                continue
            key, _, val = part.partition("=")
            try:
                args[key.strip()] = float(val)
            except ValueError:
                raise InvalidParam(f"bad density token {tag!r}") from None
        if name == "uniform":
            return cls.uniform()
        if name == "exp-tilt":
            return cls.exp_tilted(**args)
        if name == "power-tilt":
            return cls.power_tilted(**args)
        raise InvalidParam(f"unknown density {name!r}")


def _require_unit_support(density: Density1D):
    lo, hi = density.support
    if abs(lo) > 1e-12 or abs(hi - 1.0) > 1e-12:
        raise InvalidParam("this operation requires a density on [0, 1]")


def dep_measure(phi: OracleFunction, density: Density1D) -> float:
    """Dep[phi', p(C)] = int phi' p dC - (phi(1) - phi(0)).

    Zero for every oracle under a uniform density and for a linear oracle
    under any density; the independence postulate asserts it vanishes for
    the true mechanism and cause distribution.
    """
    _require_unit_support(density)
    integrand = lambda c: phi.derivative(c) * density.pdf(c)
    value = integrate(integrand, 0.0, 1.0, tol=QUAD_TOL,
                      max_nodes=QUAD_BUDGET).value
    lo, hi = phi.range
    return value - (hi - lo)


def dep_inverse(phi: OracleFunction, cause_density: Density1D) -> float:
    """Dep[(phi^-1)', p(E)] with p(E) the noiseless push-forward of the
    cause density; strictly positive for non-linear oracles whenever
    Dep[phi', p(C)] = 0.

    Raises QuadratureFailure when the inverse slope is not integrable
    (power oracles with exponent >= 2 under a uniform cause density).
    """
    if not phi.normalized and phi.range != (0.0, 1.0):
        raise InvalidParam("dep_inverse requires a normalized oracle")
    _require_unit_support(cause_density)
    p_e = Density1D.pushforward(cause_density, phi)

    def integrand(e):
        c = phi.inverse(np.asarray(e, dtype=float))
        d = phi.derivative(c)
        return p_e.pdf(e) / d

    value = integrate(integrand, 0.0, 1.0, tol=QUAD_TOL,
                      max_nodes=QUAD_BUDGET).value
    inv_range = phi.inverse(1.0) - phi.inverse(0.0)
    return value - inv_range


def expected_causal_error(noise: NoiseSpec) -> float:
    """Expected squared error of the true oracle in causal direction:
    exactly the noise variance, independent of the oracle."""
    return noise.variance


@dataclass(frozen=True)
class TheoryReport:
    """Analytic error predictions for one (oracle, density, noise) triple."""

    dep_forward: float
    dep_inverse: float
    expected_causal_error: float
    expected_anticausal_error: float
    anticausal_lower_bound: float
    anticausal_integral: float
    taylor_regime_exceeded: bool

    def to_json_dict(self) -> dict:
        return {
            "dep_forward": self.dep_forward,
            "dep_inverse": self.dep_inverse,
            "expected_causal_error": self.expected_causal_error,
            "expected_anticausal_error": self.expected_anticausal_error,
            "anticausal_lower_bound": self.anticausal_lower_bound,
            "anticausal_integral": self.anticausal_integral,
            "taylor_regime_exceeded": self.taylor_regime_exceeded,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def anticausal_integral(phi: OracleFunction, density: Density1D) -> float:
    """int_0^1 (1 / phi'(c))^2 p(c) dc by adaptive quadrature."""
    _require_unit_support(density)

    def integrand(c):
        d = np.asarray(phi.derivative(c))
        if np.any(d < _SLOPE_FLOOR):
            raise SingularSlope(
                "oracle slope below 1e-12 at a quadrature node"
            )
        return density.pdf(c) / (d * d)

    return integrate(integrand, 0.0, 1.0, tol=QUAD_TOL,
                     max_nodes=QUAD_BUDGET).value


def expected_anticausal_error(
    phi: OracleFunction, density: Density1D, noise: NoiseSpec
) -> TheoryReport:
    """Taylor-approximate expected anticausal error of the exact inverse,
    Var[n_e] * int (1/phi')^2 p dC, with its Cauchy-Schwarz lower bound.

    The report flags the configuration when the noise scale exceeds 10%
    of the oracle range, outside the regime where dropping the O(n_e^2)
    Taylor remainder is defensible.
    """
    _require_unit_support(density)
    lo, hi = phi.range
    span = hi - lo
    integral = anticausal_integral(phi, density)
    variance = noise.variance
    try:
        di = dep_inverse(phi, density)
    except (QuadratureFailure, InvalidParam):
        di = math.inf if phi.normalized else math.nan
    return TheoryReport(
        dep_forward=dep_measure(phi, density),
        dep_inverse=di,
        expected_causal_error=variance,
        expected_anticausal_error=variance * integral,
        anticausal_lower_bound=variance / span ** 2,
        anticausal_integral=integral,
        taylor_regime_exceeded=bool(math.sqrt(variance) > 0.1 * span),
    )


@dataclass(frozen=True)
class TheoremCheck:
    """Ordered comparison of the two expected errors."""

    expected_causal_error: float
    expected_anticausal_error: float
    verdict: str              # "equal" | "causal_smaller"
    in_scope: bool            # phi range <= 1, the theorem's precondition

    def as_tuple(self):
        return (self.expected_causal_error, self.expected_anticausal_error,
                self.verdict)


_EQUALITY_TOL = 1e-10


def verify_theorem(
    phi: OracleFunction, density: Density1D, noise: NoiseSpec
) -> TheoremCheck:
    """Compare expected causal and anticausal errors.

    Equality occurs only for a linear oracle with range exactly 1 or for
    zero noise; numerical ties within 1e-10 are reported as equal. When
    the oracle range exceeds 1 the theorem makes no claim and the check
    is flagged out of scope (there the anticausal prediction can even be
    the better one, reported as "anticausal_smaller"). A divergent
    anticausal integral is reported as an infinite anticausal error: the
    Taylor bound grows without limit, so the causal direction wins.
    """
    lo, hi = phi.range
    in_scope = (hi - lo) <= 1.0 + _EQUALITY_TOL
    if noise.variance == 0.0:
        # the exact inverse recovers the cause exactly without noise
        return TheoremCheck(0.0, 0.0, "equal", in_scope)
    try:
        report = expected_anticausal_error(phi, density, noise)
        causal = report.expected_causal_error
        anti = report.expected_anticausal_error
    except (QuadratureFailure, SingularSlope):
        causal, anti = noise.variance, math.inf
    verdict = "equal" if abs(anti - causal) <= _EQUALITY_TOL else (
        "causal_smaller" if causal < anti else "anticausal_smaller"
    )
    return TheoremCheck(
        expected_causal_error=causal,
        expected_anticausal_error=anti,
        verdict=verdict,
        in_scope=in_scope,
    )


def binary_conditionals(
    noise_prob: float, prior_c1: float
) -> tuple[np.ndarray, np.ndarray]:
    """Conditional tables of the binary rain problem.

    Returns (p_e_given_c, p_c_given_e), each 2x2 with the conditioning
    variable along columns: p_e_given_c[e, c] = P(E=e | C=c) and
    p_c_given_e[c, e] = P(C=c | E=e). A wet street is certain under rain,
    P(E=1 | C=1) = 1, while inferring rain from a wet street depends on
    the rain prior through P(C=1 | E=1) = p1 / (noise_prob * p0 + p1).
    """
    if not (0.0 <= noise_prob <= 1.0):
        raise InvalidParam("noise_prob must lie in [0, 1]")
    if not (0.0 < prior_c1 < 1.0):
        raise InvalidParam("prior_c1 must lie in (0, 1)")
    p0 = 1.0 - prior_c1
    p1 = prior_c1
    p_e_given_c = np.array([
        [1.0 - noise_prob, 0.0],
        [noise_prob, 1.0],
    ])
    wet = noise_prob * p0 + p1  # > 0 because prior_c1 > 0
    p_c_given_e = np.array([
        [1.0, noise_prob * p0 / wet],
        [0.0, p1 / wet],
    ])
    return p_e_given_c, p_c_given_e
