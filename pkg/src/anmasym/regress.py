"""Regression models for causal and anticausal prediction.

Three fit kinds: ordinary least squares lines, two-parameter power laws
a * x^b fitted by Gauss-Newton, and natural cubic smoothing splines with
the penalty parameter chosen by generalized cross-validation. Any fitted
model can be inverted: lines and power laws analytically, monotone
splines pointwise by bisection, which is the "inverse regression" route
(fit causally, then invert) as opposed to "reverse regression" (fit the
anticausal direction directly).

Smoothing spline internals follow the banded natural-spline equations:
with knot gaps h_i, second-derivative coefficients gamma at interior
knots, R the tridiagonal Gram matrix of gaps and Q the second-difference
map, the minimizer of sum w_i (y_i - f_i)^2 + lam * int f''^2 satisfies

    (R + lam * Q^T W^-1 Q) gamma = Q^T y,     f = y - lam * W^-1 Q gamma,

and the GCV trace reduces to tr(H) = 2 + tr(B^-1 R) with
B = R + lam * Q^T W^-1 Q, computed from the central bands of B^-1 via
the Hutchinson-de Hoog recursion (jitted; it is the only sequential
loop in the fit).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numba as nb
import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import cholesky_banded, solveh_banded

from .datagen import Dataset
from .errors import (
    DegenerateColumn, IllConditioned, InvalidParam, NotInvertible,
)
from .oracle import OracleFunction

__all__ = [
    "FitModel", "fit_linear", "fit_power", "fit_smoothing_spline",
    "invert_model", "rmse", "oracle_model", "LAMBDA_GRID",
]

# GCV grid: 31 log-spaced penalties, rescaled by data size at fit time;
# ties break toward the larger (smoother) lambda.
LAMBDA_GRID = np.logspace(-6.0, 2.0, 31)

_TIE_MERGE_REL = 1e-6
_MONO_GRID = 1024


@dataclass(frozen=True)
class FitModel:
    """A fitted prediction model.

    kind is "linear" (params = (slope, intercept)), "power"
    (params = (a, b) for a * x^b), "spline" (natural cubic smoothing
    spline given by knots, fitted values and lam), "spline_inverse"
    (pointwise bisection inverse of a monotone spline), or "oracle"
    (an exact oracle used as a predictor).
    """

    kind: str
    fit_direction: str
    params: tuple = ()
    knots: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    targets: Optional[np.ndarray] = field(default=None, repr=False)
    weights: Optional[np.ndarray] = field(default=None, repr=False)
    lam: Optional[float] = None
    training_rmse: float = math.nan
    inverted_from: Optional["FitModel"] = None
    converged: bool = True
    oracle: Optional[OracleFunction] = None

    def __post_init__(self):
        if self.fit_direction not in ("c_to_e", "e_to_c"):
            raise InvalidParam(f"bad fit_direction {self.fit_direction!r}")
        if self.kind == "spline":
            pp = CubicSpline(self.knots, self.values, bc_type="natural")
            object.__setattr__(self, "_pp", pp)

    @property
    def input_column(self) -> str:
        return "c" if self.fit_direction == "c_to_e" else "e"

    @property
    def output_column(self) -> str:
        return "e" if self.fit_direction == "c_to_e" else "c"

    def predict(self, x):
        scalar = np.isscalar(x)
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            slope, intercept = self.params
            out = slope * x + intercept
        elif self.kind == "power":
            a, b = self.params
            out = a * np.power(np.clip(x, 0.0, None), b)
        elif self.kind == "spline":
            out = self._pp(np.clip(x, self.knots[0], self.knots[-1]))
        elif self.kind == "spline_inverse":
            out = _bisect_inverse(self.inverted_from, x)
        elif self.kind == "oracle":
            out = (self.oracle.eval(x) if self.fit_direction == "c_to_e"
                   else self.oracle.inverse(x))
        else:
            raise InvalidParam(f"unknown model kind {self.kind!r}")
        if scalar:
            return float(np.asarray(out).ravel()[0])
        return np.asarray(out, dtype=float)

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "fit_direction": self.fit_direction,
            "params": list(self.params),
            "lam": self.lam,
            "training_rmse": self.training_rmse,
            "converged": self.converged,
        }
        if self.knots is not None:
            out["knots"] = self.knots.tolist()
            out["coefficients"] = self.values.tolist()
        if self.oracle is not None:
            out["oracle"] = self.oracle.token()
        if self.inverted_from is not None:
            out["inverted_from"] = self.inverted_from.to_json_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def oracle_model(phi: OracleFunction, fit_direction: str) -> FitModel:
    """Wrap an exact oracle (or its exact inverse) as a predictor."""
    return FitModel(kind="oracle", fit_direction=fit_direction, oracle=phi)


def _select_xy(data: Dataset, direction: str):
    if direction == "c_to_e":
        return data.c, data.e
    if direction == "e_to_c":
        return data.e, data.c
    raise InvalidParam(f"bad direction {direction!r}")


def _training_rmse(pred, y) -> float:
    return float(np.sqrt(np.mean((pred - y) ** 2)))


# ---------------------------------------------------------------------------
# linear least squares
# ---------------------------------------------------------------------------

def fit_linear(data: Dataset, direction: str) -> FitModel:
    """Ordinary least squares line in the requested direction."""
    x, y = _select_xy(data, direction)
    if x.size < 3:
        raise InvalidParam("fit_linear needs at least 3 samples")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx <= 0.0:
        raise DegenerateColumn("predictor column is constant")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    model = FitModel(kind="linear", fit_direction=direction,
                     params=(slope, intercept))
    return _with_rmse(model, x, y)


def _with_rmse(model: FitModel, x, y) -> FitModel:
    return replace(model, training_rmse=_training_rmse(model.predict(x), y))


# ---------------------------------------------------------------------------
# power law a * x^b by Gauss-Newton
# ---------------------------------------------------------------------------

_GN_MAX_ITER = 200
_GN_STEP_TOL = 1e-10
_POS_FLOOR = 1e-9


def fit_power(data: Dataset, direction: str) -> FitModel:
    """Least-squares fit of a * x^b with a > 0, b > 0.

    b is initialized from a line fit in log-log space over the strictly
    positive points, then (a, b) are refined by Gauss-Newton with step
    halving on the original squared loss; b is optimized as exp(beta) so
    positivity needs no constraint handling. Non-convergence within the
    iteration budget returns the best iterate with converged=False.
    """
    x, y = _select_xy(data, direction)
    if x.size < 5:
        raise InvalidParam("fit_power needs at least 5 samples")
    if x.min() < -1e-12 or x.max() > 1.0 + 1e-12:
        raise InvalidParam("fit_power expects predictor values in [0, 1]")
    x = np.clip(x, 0.0, 1.0)

    mask = (x > _POS_FLOOR) & (y > _POS_FLOOR)
    if int(mask.sum()) >= 2 and np.ptp(np.log(x[mask])) > 0:
        b0 = float(np.polynomial.polynomial.polyfit(
            np.log(x[mask]), np.log(y[mask]), 1)[1])
        b0 = min(max(b0, 1e-3), 1e3)
    else:
        b0 = 1.0
    beta = math.log(b0)
    a = _best_scale(x, y, b0)

    lnx = np.where(x > 0.0, np.log(np.where(x > 0.0, x, 1.0)), 0.0)

    def loss(a_, b_):
        r = y - a_ * np.power(x, b_)
        return float(r @ r)

    cur = loss(a, math.exp(beta))
    converged = False
    for _ in range(_GN_MAX_ITER):
        b = math.exp(beta)
        xb = np.power(x, b)
        r = y - a * xb
        ja = -xb
        jb = -a * b * xb * lnx
        g = np.array([float(ja @ r), float(jb @ r)])
        h = np.array([
            [float(ja @ ja), float(ja @ jb)],
            [float(ja @ jb), float(jb @ jb)],
        ])
        try:
            step = np.linalg.solve(h + 1e-14 * np.eye(2), -g)
        except np.linalg.LinAlgError:
            break
        t, improved = 1.0, False
        a_new = beta_new = new = None
        for _ in range(30):
            a_new = a + t * step[0]
            beta_new = beta + t * step[1]
            if a_new > 0.0 and abs(beta_new) < 50.0:
                new = loss(a_new, math.exp(beta_new))
                if new < cur:
                    improved = True
                    break
            t *= 0.5
        if not improved:
            converged = True  # stationary: no descent direction left
            break
        moved = math.hypot(t * step[0], t * step[1])
        a, beta, cur = a_new, beta_new, new
        if moved < _GN_STEP_TOL:
            converged = True
            break
    model = FitModel(kind="power", fit_direction=direction,
                     params=(float(a), float(math.exp(beta))),
                     converged=converged)
    return _with_rmse(model, x, y)


def _best_scale(x, y, b) -> float:
    xb = np.power(x, b)
    denom = float(xb @ xb)
    if denom <= 0.0:
        return max(float(np.mean(y)), _POS_FLOOR)
    a = float(xb @ y) / denom
    return a if a > 0.0 else max(float(np.mean(np.abs(y))), _POS_FLOOR)


# ---------------------------------------------------------------------------
# natural cubic smoothing spline with GCV
# ---------------------------------------------------------------------------

@nb.njit(
    "float64(float64[:], float64[:], float64[:], float64[:], float64[:])",
    cache=True,
)
def _trace_binv_r(chol_diag, chol_sup1, chol_sup2, r_diag, r_off):
    """tr(B^-1 R) from the upper banded Cholesky of pentadiagonal B.

    Hutchinson-de Hoog backward recursion for the central bands of the
    inverse of a banded SPD matrix.
    """
    m = chol_diag.size
    d = np.empty(m)
    u1 = np.zeros(m)
    u2 = np.zeros(m)
    for i in range(m):
        d[i] = 1.0 / (chol_diag[i] * chol_diag[i])
        if i + 1 < m:
            u1[i] = chol_sup1[i + 1] / chol_diag[i]
        if i + 2 < m:
            u2[i] = chol_sup2[i + 2] / chol_diag[i]
    b0 = np.zeros(m)
    b1 = np.zeros(m)
    b2 = np.zeros(m)
    b0[m - 1] = d[m - 1]
    if m >= 2:
        b1[m - 2] = -u1[m - 2] * b0[m - 1]
        b0[m - 2] = d[m - 2] - u1[m - 2] * b1[m - 2]
    for i in range(m - 3, -1, -1):
        b2[i] = -(u1[i] * b1[i + 1] + u2[i] * b0[i + 2])
        b1[i] = -(u1[i] * b0[i + 1] + u2[i] * b1[i + 1])
        b0[i] = d[i] - (u1[i] * b1[i] + u2[i] * b2[i])
    total = 0.0
    for i in range(m):
        total += b0[i] * r_diag[i]
    for i in range(m - 1):
        total += 2.0 * b1[i] * r_off[i]
    return total


def _merge_ties(x, y, tol_rel=_TIE_MERGE_REL):
    """Collapse sorted predictor values closer than tol into
    count-weighted classes (exact duplicates included)."""
    span = x[-1] - x[0]
    tol = tol_rel * max(span, np.finfo(float).tiny)
    grp = np.concatenate(([0], np.cumsum(np.diff(x) >= tol)))
    w = np.bincount(grp).astype(float)
    xs = np.bincount(grp, weights=x) / w
    ys = np.bincount(grp, weights=y) / w
    return xs, ys, w, grp


class _SplineSystem:
    """Banded matrices of the penalized natural-spline problem for one
    (knots, targets, weights) triple; reused across the lambda grid."""

    def __init__(self, x, y, w):
        self.x, self.y, self.w = x, y, w
        self.n = x.size
        h = np.diff(x)
        ih = 1.0 / h
        self.h, self.ih = h, ih
        aj, bj, cj = ih[:-1], -(ih[:-1] + ih[1:]), ih[1:]
        iw = 1.0 / w
        self.r0 = (h[:-1] + h[1:]) / 3.0
        self.r1 = h[1:-1] / 6.0
        self.q0 = aj * aj * iw[:-2] + bj * bj * iw[1:-1] + cj * cj * iw[2:]
        self.q1 = bj[:-1] * aj[1:] * iw[1:-2] + cj[:-1] * bj[1:] * iw[2:-1]
        self.q2 = cj[:-2] * aj[2:] * iw[2:-2]
        self.qty = (y[2:] - y[1:-1]) * ih[1:] - (y[1:-1] - y[:-2]) * ih[:-1]
        self.iw = iw

    def _banded(self, lam):
        m = self.n - 2
        ab = np.zeros((3, m))
        ab[2] = self.r0 + lam * self.q0
        ab[1, 1:] = self.r1 + lam * self.q1
        ab[0, 2:] = lam * self.q2
        return ab

    def _q_gamma(self, gam):
        ih = self.ih
        gf = np.zeros(self.n)
        gf[1:-1] = gam
        out = np.empty(self.n)
        out[0] = gf[1] * ih[0]
        out[-1] = gf[-2] * ih[-1]
        out[1:-1] = (gf[:-2] * ih[:-1]
                     - gf[1:-1] * (ih[:-1] + ih[1:])
                     + gf[2:] * ih[1:])
        return out

    def solve(self, lam):
        """Fitted values, weighted RSS and GCV score at one lambda.

        Returns None when the banded factorization fails (lambda too
        small for the knot spacing).
        """
        ab = self._banded(lam)
        try:
            chol = cholesky_banded(ab, lower=False)
        except np.linalg.LinAlgError:
            return None
        gam = solveh_banded(ab, self.qty, lower=False)
        resid = lam * self._q_gamma(gam) * self.iw     # y - f
        rss = float(np.dot(self.w, resid * resid))
        trh = 2.0 + _trace_binv_r(chol[2], chol[1], chol[0],
                                  self.r0, self.r1)
        denom = self.n - trh
        gcv = math.inf if denom <= 0 else self.n * rss / denom ** 2
        return self.y - resid, rss, trh, gcv


def _lambda_grid(n_knots: int) -> np.ndarray:
    return LAMBDA_GRID * (n_knots / 1000.0)


def fit_smoothing_spline(
    data: Dataset, direction: str, lam: Optional[float] = None
) -> FitModel:
    """Cubic smoothing spline minimizing sum(resid^2) + lam * int f''^2.

    When lam is not supplied it is chosen by generalized cross-validation
    n * RSS / (n - tr H)^2 over a 31-point logarithmic grid scaled by the
    number of knots, ties broken toward the larger lam. Predictor ties
    (and near-ties below 1e-6 of the span) are averaged into weighted
    knots before fitting. Prediction clamps inputs to the knot interval,
    i.e. extrapolation is constant.
    """
    x, y = _select_xy(data, direction)
    if x.size < 10:
        raise InvalidParam("fit_smoothing_spline needs at least 10 samples")
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    if xs[-1] <= xs[0]:
        raise DegenerateColumn("predictor column is constant")
    kx, ky, kw, grp = _merge_ties(xs, ys)
    if kx.size < 4:
        raise InvalidParam("too few distinct predictor values for a spline")
    system = _SplineSystem(kx, ky, kw)

    if lam is not None:
        sol = system.solve(float(lam))
        if sol is None:
            raise IllConditioned(
                f"spline system factorization failed at lam={lam!r}"
            )
        fitted, chosen = sol[0], float(lam)
    else:
        best = None
        for cand in _lambda_grid(kx.size):
            sol = system.solve(cand)
            if sol is None:
                continue
            # <= keeps the larger lambda on ties
            if best is None or sol[3] <= best[0]:
                best = (sol[3], cand, sol[0])
        if best is None:
            raise IllConditioned("spline system factorization failed "
                                 "for every lambda on the grid")
        _, chosen, fitted = best

    model = FitModel(
        kind="spline", fit_direction=direction, knots=kx, values=fitted,
        targets=ky, weights=kw, lam=chosen,
    )
    return replace(model, training_rmse=_training_rmse(fitted[grp], ys))


# ---------------------------------------------------------------------------
# model inversion
# ---------------------------------------------------------------------------

def _monotone_direction(model: FitModel):
    """+1 strictly increasing, -1 strictly decreasing, 0 otherwise,
    checked on a 1024-point grid over the knot interval."""
    grid = np.linspace(model.knots[0], model.knots[-1], _MONO_GRID)
    vals = model.predict(grid)
    span = vals[-1] - vals[0]
    if abs(span) <= 1e-12:
        return 0
    d = np.diff(vals)
    if np.all(d > 0.0):
        return 1
    if np.all(d < 0.0):
        return -1
    return 0


def _bisect_inverse(spline: FitModel, y):
    """Pointwise inverse of a monotone spline by bisection; inputs are
    clamped to the fitted output range."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo_x, hi_x = spline.knots[0], spline.knots[-1]
    v0, v1 = spline.predict(lo_x), spline.predict(hi_x)
    sign = 1.0 if v1 >= v0 else -1.0
    y = np.clip(y, min(v0, v1), max(v0, v1))
    lo = np.full_like(y, lo_x)
    hi = np.full_like(y, hi_x)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        too_low = sign * (spline.predict(mid) - y) < 0.0
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
        if np.max(hi - lo) < 1e-14:
            break
    mid = 0.5 * (lo + hi)
    # refine endpoints where residual is above tolerance is unnecessary:
    # 80 bisections on a unit-scale interval reach float resolution
    return mid


def invert_model(model: FitModel) -> FitModel:
    """Invert a fitted model for use in the opposite direction.

    Lines and power laws invert analytically (the inverse of a power law
    is again a power law). Splines must be strictly monotone on a
    1024-point grid; a non-monotone GCV fit is refit with the smallest
    grid lambda that restores monotonicity before NotInvertible is
    raised. Spline inverses evaluate by bisection to |residual| <= 1e-8
    and clamp queries onto the fitted range.
    """
    flipped = "e_to_c" if model.fit_direction == "c_to_e" else "c_to_e"
    if model.kind == "linear":
        slope, intercept = model.params
        if slope == 0.0:
            raise NotInvertible("cannot invert a flat line")
        return FitModel(kind="linear", fit_direction=flipped,
                        params=(1.0 / slope, -intercept / slope),
                        inverted_from=model)
    if model.kind == "power":
        a, b = model.params
        # x = (y / a)^(1/b) = a^(-1/b) * y^(1/b)
        return FitModel(kind="power", fit_direction=flipped,
                        params=(a ** (-1.0 / b), 1.0 / b),
                        inverted_from=model)
    if model.kind == "oracle":
        raise InvalidParam(
            "wrap the oracle in the opposite direction instead of inverting"
        )
    if model.kind != "spline":
        raise NotInvertible(f"kind {model.kind!r} is not invertible")

    spline = model
    if _monotone_direction(spline) == 0:
        spline = _refit_monotone(model)
    return FitModel(kind="spline_inverse", fit_direction=flipped,
                    inverted_from=spline, lam=spline.lam)


def _refit_monotone(model: FitModel) -> FitModel:
    if model.targets is None:
        raise NotInvertible("spline is not monotone and carries no "
                            "training data to refit")
    system = _SplineSystem(model.knots, model.targets, model.weights)
    for cand in _lambda_grid(model.knots.size):
        if model.lam is not None and cand <= model.lam:
            continue  # only smoother than the rejected fit
        sol = system.solve(cand)
        if sol is None:
            continue
        refit = replace(model, values=sol[0], lam=cand)
        if _monotone_direction(refit) != 0:
            return refit
    raise NotInvertible(
        "spline is not monotone at any lambda on the grid"
    )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def rmse(model: FitModel, data: Dataset, target: str) -> float:
    """Root mean squared prediction error of a model on a dataset.

    ``target`` names the predicted column and must match the model's
    output direction.
    """
    if target not in ("c", "e"):
        raise InvalidParam(f"bad target {target!r}")
    if target != model.output_column:
        raise InvalidParam(
            f"model predicts {model.output_column!r}, not {target!r}"
        )
    x = data.column(model.input_column)
    y = data.column(target)
    return _training_rmse(model.predict(x), y)
