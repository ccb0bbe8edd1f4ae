"""Benchmark harnesses: known-oracle runs, spline runs, real-world pairs.

Three experiments compare root mean squared prediction error in the
causal direction (predicting the effect from the cause) against the
anticausal direction (predicting the cause from the effect):

  run_known_oracle    the exact oracle predicts causally and its exact
                      inverse anticausally, over a (oracle, sigma) grid;
  run_unknown_oracle  smoothing splines are fitted independently in both
                      directions on data whose effect column has been
                      min-max normalized;
  run_pairs_benchmark a power law is fitted causally on a normalized
                      bivariate pair and its analytic inverse predicts
                      anticausally, recording the exponent b per pair.

Per-run RNG streams derive from (base_seed, config index, run index), so
runs can be scheduled in any order without changing results, and every
harness is a pure function of its arguments.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .datagen import (
    Dataset, NoiseSpec, flip_effect_sign, generate, normalize_minmax,
)
from .errors import (
    AnmasymError, InvalidParam, MissingMetadata, ParseError,
    QuadratureFailure, SingularSlope,
)
from .oracle import OracleFunction, Power, ScaledPower
from .regress import fit_power, fit_smoothing_spline, invert_model
from .theory import Density1D, TheoryReport, expected_anticausal_error

__all__ = [
    "AsymmetryReport", "PairRecord", "PairsSummary", "run_known_oracle",
    "run_unknown_oracle", "ingest_pairs", "run_pairs_benchmark",
    "render_results_csv", "render_summary_json", "write_results_csv",
    "write_summary_json", "RESULT_COLUMNS",
]

# verdict tie band: |mean gap| <= max(1e-12, 0.05 * combined standard error)
_TIE_ABS = 1e-12
_TIE_SE_FACTOR = 0.05

# informational flag for pairs with a strongly one-sided error ratio
_EXTREME_GAP_RATIO = 3.0


def _derive_seed(base_seed: int, config_index: int, run_index: int) -> int:
    ss = np.random.SeedSequence(
        entropy=int(base_seed), spawn_key=(config_index, run_index)
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _verdict(gap: float, se_combined: float) -> str:
    if abs(gap) <= max(_TIE_ABS, _TIE_SE_FACTOR * se_combined):
        return "tie"
    return "causal_smaller" if gap > 0 else "anticausal_smaller"


@dataclass(frozen=True)
class AsymmetryReport:
    """RMSE statistics of one benchmark configuration."""

    config: dict
    rmse_causal_mean: float
    rmse_causal_std: float
    rmse_anticausal_mean: float
    rmse_anticausal_std: float
    runs: int
    causal_wins: int
    verdict: str
    theory: Optional[TheoryReport] = None
    theory_error: Optional[str] = None

    @property
    def gap(self) -> float:
        return self.rmse_anticausal_mean - self.rmse_causal_mean

    @property
    def se_combined(self) -> float:
        return math.sqrt(
            (self.rmse_causal_std ** 2 + self.rmse_anticausal_std ** 2)
            / max(self.runs, 1)
        )

    def csv_row(self) -> dict:
        oracle = self.config.get("oracle")
        return {
            "identifier": oracle,
            "sigma": self.config.get("sigma"),
            "b": self.config.get("b"),
            "rmse_causal": self.rmse_causal_mean,
            "rmse_anticausal": self.rmse_anticausal_mean,
            "gap": self.gap,
            "verdict": self.verdict,
        }

    def to_json_dict(self) -> dict:
        out = {
            "config": self.config,
            "rmse_causal_mean": self.rmse_causal_mean,
            "rmse_causal_std": self.rmse_causal_std,
            "rmse_anticausal_mean": self.rmse_anticausal_mean,
            "rmse_anticausal_std": self.rmse_anticausal_std,
            "runs": self.runs,
            "causal_wins": self.causal_wins,
            "verdict": self.verdict,
            "theory": self.theory.to_json_dict() if self.theory else None,
            "theory_error": self.theory_error,
        }
        return out


def _summarize(config, causal, anticausal, theory=None, theory_error=None):
    causal = np.asarray(causal)
    anticausal = np.asarray(anticausal)
    runs = causal.size
    ddof = 1 if runs > 1 else 0
    report = AsymmetryReport(
        config=config,
        rmse_causal_mean=float(causal.mean()),
        rmse_causal_std=float(causal.std(ddof=ddof)),
        rmse_anticausal_mean=float(anticausal.mean()),
        rmse_anticausal_std=float(anticausal.std(ddof=ddof)),
        runs=runs,
        causal_wins=int(np.sum(causal < anticausal)),
        verdict="",
        theory=theory,
        theory_error=theory_error,
    )
    return replace(report, verdict=_verdict(report.gap, report.se_combined))


def _oracle_b(phi: OracleFunction):
    if isinstance(phi, Power):
        return phi.a
    if isinstance(phi, ScaledPower):
        return phi.b
    return None


def _auto_policy(phi: OracleFunction) -> str:
    """Effects are kept valid with respect to the inverse: families whose
    closed-form inverse exists on all of R need no intervention."""
    return "none" if phi.inverse_is_total() else "resample"


def run_known_oracle(
    oracles: Sequence[OracleFunction],
    sigmas: Sequence[float],
    n: int = 1000,
    runs: int = 100,
    base_seed: int = 0,
    noise_policy: str = "auto",
    noise_law: str = "gaussian",
) -> list[AsymmetryReport]:
    """Predict with the exact oracle causally and its exact inverse
    anticausally on generated data, per (oracle, sigma) configuration.

    Attaches the analytic error predictions under a uniform cause
    density when the inverse-slope integrals converge; divergent
    configurations carry the failure message instead.
    """
    if runs < 1:
        raise InvalidParam("runs must be >= 1")
    reports = []
    density = Density1D.uniform()
    cfg_index = 0
    for phi in oracles:
        policy = _auto_policy(phi) if noise_policy == "auto" else noise_policy
        for sigma in sigmas:
            noise = _make_noise(noise_law, sigma)
            causal = np.empty(runs)
            anticausal = np.empty(runs)
            for r in range(runs):
                seed = _derive_seed(base_seed, cfg_index, r)
                data = generate(phi, noise, n, seed, noise_policy=policy)
                fc = np.asarray(phi.eval(data.c))
                causal[r] = math.sqrt(float(np.mean((fc - data.e) ** 2)))
                # the inverse extends beyond [phi(0), phi(1)] wherever its
                # closed form exists, so unconstrained noise (the linear
                # case) is inverted exactly
                chat = np.asarray(phi.inverse_extended(data.e))
                anticausal[r] = math.sqrt(
                    float(np.mean((chat - data.c) ** 2))
                )
            theory = theory_error = None
            try:
                theory = expected_anticausal_error(phi, density, noise)
            except (QuadratureFailure, SingularSlope) as exc:
                theory_error = f"{type(exc).__name__}: {exc}"
            config = {
                "experiment": "known",
                "oracle": phi.token(),
                "sigma": float(sigma),
                "b": _oracle_b(phi),
                "n": int(n),
                "runs": int(runs),
                "base_seed": int(base_seed),
                "noise_policy": policy,
                "noise_law": noise_law,
            }
            reports.append(
                _summarize(config, causal, anticausal, theory, theory_error)
            )
            cfg_index += 1
    return reports


def _make_noise(noise_law: str, sigma: float) -> NoiseSpec:
    if noise_law == "gaussian":
        return NoiseSpec.gaussian(sigma)
    if noise_law == "uniform":
        return NoiseSpec.uniform(sigma)
    raise InvalidParam(f"unknown noise law {noise_law!r}")


def run_unknown_oracle(
    oracles: Sequence[OracleFunction],
    sigmas: Sequence[float],
    n: int = 1000,
    runs: int = 100,
    base_seed: int = 0,
    noise_law: str = "uniform",
    lam: Optional[float] = None,
) -> list[AsymmetryReport]:
    """Fit smoothing splines independently in both directions and compare
    their RMSE against the observed targets.

    The whole effect column is min-max normalized before fitting (the
    causal direction is treated as unknown, so only the observed data can
    be normalized). Noise defaults to the uniform law with half-width
    sigma, the regime in which spline residuals reproduce the reference
    asymmetry levels; pass noise_law="gaussian" for N(0, sigma) instead.
    """
    if runs < 1:
        raise InvalidParam("runs must be >= 1")
    reports = []
    cfg_index = 0
    for phi in oracles:
        for sigma in sigmas:
            noise = _make_noise(noise_law, sigma)
            causal = np.empty(runs)
            anticausal = np.empty(runs)
            for r in range(runs):
                seed = _derive_seed(base_seed, cfg_index, r)
                data = generate(phi, noise, n, seed, noise_policy="none")
                data = normalize_minmax(data, ("e",))
                m_c = fit_smoothing_spline(data, "c_to_e", lam=lam)
                m_a = fit_smoothing_spline(data, "e_to_c", lam=lam)
                causal[r] = m_c.training_rmse
                anticausal[r] = m_a.training_rmse
            config = {
                "experiment": "unknown",
                "oracle": phi.token(),
                "sigma": float(sigma),
                "b": _oracle_b(phi),
                "n": int(n),
                "runs": int(runs),
                "base_seed": int(base_seed),
                "noise_law": noise_law,
                "lambda": lam,
                "fit": "smoothing_spline",
            }
            reports.append(_summarize(config, causal, anticausal))
            cfg_index += 1
    return reports


# ---------------------------------------------------------------------------
# real-world cause-effect pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairRecord:
    """One ingested bivariate pair, oriented and normalized."""

    identifier: str
    data: Dataset
    weight: float = 1.0
    fitted_b: Optional[float] = None
    sign_flipped: bool = False


@dataclass(frozen=True)
class PairMeta:
    cause_first: int
    cause_last: int
    effect_first: int
    effect_last: int
    weight: float


def _read_pairmeta(path: str) -> dict[str, PairMeta]:
    if not os.path.isfile(path):
        raise MissingMetadata(f"metadata file not found: {path}")
    table: dict[str, PairMeta] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 5:
                raise ParseError(
                    f"metadata line {lineno}: expected "
                    "'identifier cause_first cause_last effect_first "
                    "effect_last [weight]'",
                    path=path, line=lineno,
                )
            try:
                meta = PairMeta(
                    cause_first=int(parts[1]), cause_last=int(parts[2]),
                    effect_first=int(parts[3]), effect_last=int(parts[4]),
                    weight=float(parts[5]) if len(parts) > 5 else 1.0,
                )
            except ValueError:
                raise ParseError(
                    f"metadata line {lineno}: non-numeric field",
                    path=path, line=lineno,
                ) from None
            table[parts[0]] = meta
    return table


def _load_pair_columns(path: str) -> np.ndarray:
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ParseError(
                    f"non-numeric value at line {lineno}",
                    path=path, line=lineno,
                ) from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(
                    f"ragged row at line {lineno}", path=path, line=lineno
                )
            rows.append(vals)
    if not rows:
        raise ParseError("empty pair file", path=path, line=0)
    return np.asarray(rows, dtype=float)


def ingest_pairs(
    directory: str, metadata_path: str
) -> tuple[list[PairRecord], dict[str, str]]:
    """Load a directory of whitespace-separated bivariate pair files.

    Every data file is either returned as a PairRecord or listed in the
    skip map with a machine-readable reason (multivariate layout, missing
    metadata, parse or degeneracy problems). Columns are oriented so the
    ground-truth cause comes first, the effect sign is flipped when the
    pair is approximately monotonically decreasing (negative Spearman
    rank correlation), and both columns are min-max normalized.
    """
    meta_table = _read_pairmeta(metadata_path)
    records: list[PairRecord] = []
    skips: dict[str, str] = {}
    meta_abs = os.path.abspath(metadata_path)
    try:
        entries = sorted(os.listdir(directory))
    except OSError as exc:
        raise MissingMetadata(f"cannot read pair directory: {exc}") from exc
    for name in entries:
        path = os.path.join(directory, name)
        if not os.path.isfile(path) or os.path.abspath(path) == meta_abs:
            continue
        if name.startswith("."):
            continue
        stem = os.path.splitext(name)[0]
        meta = meta_table.get(stem) or meta_table.get(name)
        if meta is None:
            skips[stem] = "missing-metadata"
            continue
        try:
            cols = _load_pair_columns(path)
        except ParseError as exc:
            skips[stem] = f"parse-error:line-{exc.line}"
            continue
        if cols.shape[1] > 2:
            skips[stem] = "multivariate"
            continue
        if (meta.cause_first != meta.cause_last
                or meta.effect_first != meta.effect_last):
            skips[stem] = "multivariate"
            continue
        if cols.shape[0] < 10:
            skips[stem] = "too-few-samples"
            continue
        ci, ei = meta.cause_first - 1, meta.effect_first - 1
        if not (0 <= ci < cols.shape[1] and 0 <= ei < cols.shape[1]):
            skips[stem] = "bad-column-index"
            continue
        c, e = cols[:, ci], cols[:, ei]
        if not (np.isfinite(c).all() and np.isfinite(e).all()):
            skips[stem] = "non-finite-values"
            continue
        if np.ptp(c) == 0.0 or np.ptp(e) == 0.0:
            skips[stem] = "degenerate-column"
            continue
        data = Dataset(c=c, e=e, truth_direction="c_causes_e")
        rho = _scipy_stats.spearmanr(c, e).statistic
        flipped = bool(np.isfinite(rho) and rho < 0.0)
        if flipped:
            data = flip_effect_sign(data)
        data = normalize_minmax(data, ("c", "e"))
        records.append(PairRecord(
            identifier=stem, data=data, weight=meta.weight,
            sign_flipped=flipped,
        ))
    return records, skips


@dataclass(frozen=True)
class PairsSummary:
    """Scored pair table plus the headline causal-win fraction."""

    rows: list = field(default_factory=list)
    records: list = field(default_factory=list, repr=False)
    wins: int = 0
    losses: int = 0
    ties: int = 0
    failures: dict = field(default_factory=dict)
    skip_reasons: dict = field(default_factory=dict)

    @property
    def scored(self) -> int:
        return self.wins + self.losses + self.ties

    @property
    def win_fraction(self) -> float:
        return self.wins / self.scored if self.scored else math.nan

    def to_json_dict(self) -> dict:
        return {
            "win_fraction": self.win_fraction,
            "counts": {
                "scored": self.scored,
                "causal_wins": self.wins,
                "anticausal_wins": self.losses,
                "ties": self.ties,
                "fit_failures": len(self.failures),
                "skipped": len(self.skip_reasons),
            },
            "fit_failures": self.failures,
            "skip_reasons": self.skip_reasons,
        }


def run_pairs_benchmark(
    records: Sequence[PairRecord],
    skip_reasons: Optional[dict] = None,
) -> PairsSummary:
    """Score each pair: fit a power law causally on the normalized data,
    predict anticausally with its analytic inverse (same parameters), and
    compare RMSEs. Pairs whose fit fails are excluded from the win
    fraction with a recorded reason; extreme error ratios are flagged in
    the row table, not dropped.
    """
    if not records:
        raise InvalidParam("run_pairs_benchmark needs at least one pair")
    rows = []
    scored_records = []
    wins = losses = ties = 0
    failures: dict[str, str] = {}
    for rec in records:
        try:
            causal_fit = fit_power(rec.data, "c_to_e")
            inverse_fit = invert_model(causal_fit)
            pred_e = causal_fit.predict(rec.data.c)
            rmse_c = float(np.sqrt(np.mean((pred_e - rec.data.e) ** 2)))
            pred_c = inverse_fit.predict(rec.data.e)
            rmse_a = float(np.sqrt(np.mean((pred_c - rec.data.c) ** 2)))
        except AnmasymError as exc:
            failures[rec.identifier] = f"{type(exc).__name__}: {exc}"
            continue
        fitted_b = float(causal_fit.params[1])
        scored_records.append(replace(rec, fitted_b=fitted_b))
        gap = rmse_a - rmse_c
        verdict = _verdict(gap, 0.0)
        if verdict == "causal_smaller":
            wins += 1
        elif verdict == "anticausal_smaller":
            losses += 1
        else:
            ties += 1
        hi, lo = max(rmse_c, rmse_a), min(rmse_c, rmse_a)
        rows.append({
            "identifier": rec.identifier,
            "sigma": None,
            "b": fitted_b,
            "rmse_causal": rmse_c,
            "rmse_anticausal": rmse_a,
            "gap": gap,
            "verdict": verdict,
            "weight": rec.weight,
            "extreme_gap": bool(lo > 0 and hi / lo > _EXTREME_GAP_RATIO),
            "converged": causal_fit.converged,
        })
    return PairsSummary(
        rows=rows, records=scored_records, wins=wins, losses=losses,
        ties=ties, failures=failures, skip_reasons=dict(skip_reasons or {}),
    )


# ---------------------------------------------------------------------------
# result emission
# ---------------------------------------------------------------------------

RESULT_COLUMNS = (
    "identifier", "sigma", "b", "rmse_causal", "rmse_anticausal",
    "gap", "verdict",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        # oracle tokens may contain commas; quote per RFC 4180
        if "," in value or '"' in value:
            return '"' + value.replace('"', '""') + '"'
        return value
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


def render_results_csv(rows: Sequence[dict]) -> str:
    """Fixed-column CSV text, floats printed with 9 significant digits."""
    lines = [",".join(RESULT_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in RESULT_COLUMNS))
    return "\n".join(lines) + "\n"


def render_summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True,
                      default=json_default) + "\n"


def write_results_csv(rows: Sequence[dict], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(render_results_csv(rows))


def write_summary_json(summary: dict, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(render_summary_json(summary))


def json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")
