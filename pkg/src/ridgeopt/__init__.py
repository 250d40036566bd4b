"""Optimal ridge penalty selection: analytic risk, sample-based estimates, benchmarks."""

from .errors import (
    DegenerateParameterError,
    DegenerateSampleError,
    DimensionMismatchError,
    EstimationError,
    ExcessiveSkipError,
    NonConvexObjectiveError,
    RidgeOptError,
    SingularityError,
)
from .estimation import (
    recommend_signal_to_noise,
    estimate_parameters,
    sample_opt_reg,
)
from .eval_harness import EvalConfig, evaluate
from .linalg_core import center_columns, decompose, ridge_solve
from .risk_analytics import RiskInputs, expected_mse, lambda_min_search, model_opt_reg

__version__ = "0.1.0"

__all__ = [
    "DegenerateParameterError", "DegenerateSampleError", "DimensionMismatchError",
    "EstimationError", "ExcessiveSkipError", "NonConvexObjectiveError", "RidgeOptError",
    "SingularityError", "recommend_signal_to_noise", "estimate_parameters", "sample_opt_reg",
    "EvalConfig", "evaluate", "center_columns", "decompose", "ridge_solve",
    "RiskInputs", "expected_mse", "lambda_min_search", "model_opt_reg",
]
