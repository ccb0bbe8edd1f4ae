"""anmasym: error asymmetry between causal and anticausal regression
under additive-noise models with independent mechanisms.

The package generates synthetic cause-effect data, evaluates the
analytic expected-error predictors by quadrature, fits and inverts
regression models, and reproduces the standard benchmark suite
(known-oracle grids, smoothing-spline grids, cause-effect pair corpora).
"""

from .datagen import (
    Dataset, NoiseSpec, flip_effect_sign, generate, normalize_minmax,
    read_dataset_csv, write_dataset_csv,
)
from .errors import (
    AnmasymError, DegenerateColumn, DomainError, IllConditioned,
    InvalidParam, MissingMetadata, NotInvertible, ParseError,
    QuadratureFailure, ResampleBudgetError, SingularSlope,
)
from .oracle import (
    Exponential, Linear, OracleFunction, Power, ScaledPower, SineWindow,
    parse_oracle,
)
from .quadrature import QuadResult, integrate
from .regress import (
    FitModel, fit_linear, fit_power, fit_smoothing_spline, invert_model,
    oracle_model, rmse,
)
from .theory import (
    Density1D, TheoremCheck, TheoryReport, binary_conditionals,
    dep_inverse, dep_measure, expected_anticausal_error,
    expected_causal_error, verify_theorem,
)
from .bench import (
    AsymmetryReport, PairRecord, PairsSummary, ingest_pairs,
    run_known_oracle, run_pairs_benchmark, run_unknown_oracle,
    write_results_csv, write_summary_json,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # oracle
    "OracleFunction", "Linear", "Exponential", "SineWindow", "Power",
    "ScaledPower", "parse_oracle",
    # datagen
    "NoiseSpec", "Dataset", "generate", "normalize_minmax",
    "flip_effect_sign", "write_dataset_csv", "read_dataset_csv",
    # quadrature
    "integrate", "QuadResult",
    # theory
    "Density1D", "TheoryReport", "TheoremCheck", "dep_measure",
    "dep_inverse", "expected_causal_error", "expected_anticausal_error",
    "verify_theorem", "binary_conditionals",
    # regress
    "FitModel", "fit_linear", "fit_power", "fit_smoothing_spline",
    "invert_model", "rmse", "oracle_model",
    # bench
    "AsymmetryReport", "PairRecord", "PairsSummary", "run_known_oracle",
    "run_unknown_oracle", "ingest_pairs", "run_pairs_benchmark",
    "write_results_csv", "write_summary_json",
    # errors
    "AnmasymError", "DomainError", "InvalidParam", "DegenerateColumn",
    "ResampleBudgetError", "QuadratureFailure", "SingularSlope",
    "NotInvertible", "IllConditioned", "ParseError", "MissingMetadata",
]
