"""Synthetic additive-noise-model data generation and normalization.

The generation protocol: cause samples are drawn i.i.d. U(0, 1) and then
affinely anchored so the sample min is exactly 0 and the sample max
exactly 1; the effect is e = phi(c) + n_e with zero-mean noise. Three
policies control how noise interacts with the oracle's noiseless range
[phi(0), phi(1)]:

    resample : redraw a sample's noise until the effect lands inside the
               range (cap 1000 attempts per sample)
    clamp    : project the effect onto the range
    none     : leave effects untouched

Resampling slightly truncates the noise law near the range boundaries;
analytic error predictors deliberately keep using the nominal variance.

Everything is a pure function of its arguments: identical (seed,
parameters) give bit-identical datasets.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DegenerateColumn, InvalidParam, ResampleBudgetError
from .oracle import OracleFunction

__all__ = [
    "NoiseSpec", "Dataset", "generate", "normalize_minmax",
    "flip_effect_sign", "write_dataset_csv", "read_dataset_csv",
]

_RESAMPLE_CAP = 1000

NOISE_POLICIES = ("resample", "clamp", "none")


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean additive noise law.

    law is "gaussian" (param = standard deviation) or "uniform"
    (param = half-width of U(-param, param)); variance is derived.
    """

    law: str
    param: float

    def __post_init__(self):
        if self.law not in ("gaussian", "uniform"):
            raise InvalidParam(f"unknown noise law {self.law!r}")
        if not (self.param >= 0) or not math.isfinite(self.param):
            raise InvalidParam("noise parameter must be finite and >= 0")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseSpec":
        return cls("gaussian", float(sigma))

    @classmethod
    def uniform(cls, half_width: float) -> "NoiseSpec":
        return cls("uniform", float(half_width))

    @property
    def variance(self) -> float:
        if self.law == "gaussian":
            return self.param ** 2
        return self.param ** 2 / 3.0

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.param == 0.0:
            return np.zeros(size)
        if self.law == "gaussian":
            return rng.normal(0.0, self.param, size)
        return rng.uniform(-self.param, self.param, size)

    def describe(self) -> dict:
        return {"law": self.law, "param": self.param, "variance": self.variance}


@dataclass(frozen=True)
class Dataset:
    """Paired (c, e) samples with normalization metadata.

    normalization maps a column name to (offset, scale) such that the
    stored column equals (previous - offset) / scale; inverting the
    transform recovers the pre-normalization values.
    """

    c: np.ndarray
    e: np.ndarray
    truth_direction: Optional[str] = None
    normalization: dict = field(default_factory=dict)
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        e = np.asarray(self.e, dtype=float)
        if c.ndim != 1 or e.ndim != 1 or c.size != e.size:
            raise InvalidParam("c and e must be 1-d arrays of equal length")
        if c.size < 2:
            raise InvalidParam("a dataset needs at least 2 samples")
        if not (np.isfinite(c).all() and np.isfinite(e).all()):
            raise InvalidParam("dataset contains non-finite values")
        if self.truth_direction not in (None, "c_causes_e", "e_causes_c", "unknown"):
            raise InvalidParam(f"bad truth_direction {self.truth_direction!r}")
        c.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "e", e)

    def __len__(self) -> int:
        return self.c.size

    def column(self, name: str) -> np.ndarray:
        if name == "c":
            return self.c
        if name == "e":
            return self.e
        raise InvalidParam(f"unknown column {name!r}")


def _anchored_uniform(rng: np.random.Generator, n: int) -> tuple[np.ndarray, tuple]:
    u = rng.uniform(0.0, 1.0, n)
    lo, hi = u.min(), u.max()
    if hi <= lo:
        raise DegenerateColumn("degenerate uniform draw")  # pragma: no cover
    return (u - lo) / (hi - lo), (float(lo), float(hi - lo))


def generate(
    phi: OracleFunction,
    noise: NoiseSpec,
    n: int,
    seed: int,
    noise_policy: str = "resample",
) -> Dataset:
    """Generate an ANM dataset e = phi(c) + n_e.

    The cause column is exact-sample anchored: min 0, max 1. The policy
    keeps effects valid with respect to the inverse (see module docstring).
    """
    if n < 2:
        raise InvalidParam(f"n must be >= 2, got {n}")
    if noise_policy not in NOISE_POLICIES:
        raise InvalidParam(f"unknown noise policy {noise_policy!r}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
    c, c_transform = _anchored_uniform(rng, n)
    fc = np.asarray(phi.eval(c))
    n_e = noise.draw(rng, n)
    lo, hi = phi.range
    if noise_policy == "resample":
        e = fc + n_e
        bad = (e < lo) | (e > hi)
        attempts = 0
        while bad.any():
            attempts += 1
            if attempts > _RESAMPLE_CAP:
                raise ResampleBudgetError(
                    f"{int(bad.sum())} samples still out of range after "
                    f"{_RESAMPLE_CAP} resampling attempts"
                )
            n_e[bad] = noise.draw(rng, int(bad.sum()))
            e = fc + n_e
            bad = (e < lo) | (e > hi)
    elif noise_policy == "clamp":
        e = np.clip(fc + n_e, lo, hi)
    else:
        e = fc + n_e
    params = {
        "oracle": phi.token(),
        "noise": noise.describe(),
        "n": int(n),
        "noise_policy": noise_policy,
    }
    return Dataset(
        c=c, e=e, truth_direction="c_causes_e",
        normalization={"c": c_transform}, seed=int(seed), params=params,
    )


def normalize_minmax(data: Dataset, columns=("e",)) -> Dataset:
    """Affinely map the selected columns onto [0, 1], recording the
    (offset, scale) transform so the mapping is invertible."""
    cols = {"c": data.c, "e": data.e}
    norms = dict(data.normalization)
    for name in columns:
        v = cols[name] if name in cols else data.column(name)
        lo, hi = float(v.min()), float(v.max())
        if hi <= lo:
            raise DegenerateColumn(f"column {name!r} has max == min")
        cols[name] = (v - lo) / (hi - lo)
        norms[name] = (lo, hi - lo)
    return replace(data, c=cols["c"], e=cols["e"], normalization=norms)


def denormalize_column(data: Dataset, name: str) -> np.ndarray:
    """Invert the recorded transform of a column (one step)."""
    if name not in data.normalization:
        return data.column(name)
    off, scale = data.normalization[name]
    return data.column(name) * scale + off


def flip_effect_sign(data: Dataset) -> Dataset:
    """Negate the effect column (used to orient approximately decreasing
    pairs); updates the recorded transform so inversion still works."""
    norms = dict(data.normalization)
    if "e" in norms:
        off, scale = norms["e"]
        norms["e"] = (off, -scale)
    else:
        norms["e"] = (0.0, -1.0)
    return replace(data, e=-data.e, normalization=norms)


# serialization: two-column CSV with a JSON sidecar -------------------------

def _sidecar_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def write_dataset_csv(data: Dataset, path: str) -> str:
    """Write ``c,e`` CSV plus a JSON sidecar; returns the sidecar path."""
    lines = ["c,e"]
    lines.extend(
        f"{c:.17g},{e:.17g}" for c, e in zip(data.c, data.e)
    )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    sidecar = {
        "seed": data.seed,
        "parameters": data.params,
        "normalization": {k: list(v) for k, v in data.normalization.items()},
        "truth_direction": data.truth_direction,
        "n": len(data),
    }
    spath = _sidecar_path(path)
    with open(spath, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return spath


def read_dataset_csv(path: str) -> Dataset:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "c,e":
            raise InvalidParam(f"unexpected dataset header {header!r}")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    meta = {}
    spath = _sidecar_path(path)
    if os.path.exists(spath):
        with open(spath) as fh:
            meta = json.load(fh)
    return Dataset(
        c=body[:, 0], e=body[:, 1],
        truth_direction=meta.get("truth_direction"),
        normalization={
            k: tuple(v) for k, v in meta.get("normalization", {}).items()
        },
        seed=meta.get("seed"),
        params=meta.get("parameters", {}),
    )
