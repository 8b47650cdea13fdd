"""Robust weighted likelihood estimation of the multivariate von Mises sine model."""

__version__ = "0.1.0"

from .circular import circular_correlation, mean_direction, mean_resultant_length
from .estimators import SineMLE, SineWLE
from .exceptions import (
    DegenerateCorrelationError,
    DegenerateDirectionError,
    DegenerateSubsampleError,
    EstimationError,
    StrategyError,
    VMTorusError,
)
from .experiments import ScenarioSpec, bivariate_scenario, five_dim_scenario, run_trials, summarize
from .kde import TorusKDE, kde_eval, kde_eval_batch
from .model import (
    NormalizationStrategy,
    PrecisionForm,
    SineModelParams,
    log_density,
    log_norm_const,
    log_unnormalized_density,
    params_from_precision,
    precision_from_params,
)
from .sampling import ContaminationSpec, GibbsConfig, contaminate, sample_sine_model
from .weights import RafSpec, pearson_residual, residual_report
from .wle import FitResult, WleConfig, mle_fit, monitor, wle_fit, wle_step

__all__ = [
    "SineMLE", "SineWLE", "TorusKDE", "SineModelParams", "PrecisionForm", "NormalizationStrategy",
    "GibbsConfig", "ContaminationSpec", "RafSpec", "WleConfig", "FitResult", "ScenarioSpec",
    "log_density", "log_norm_const", "log_unnormalized_density", "params_from_precision",
    "precision_from_params", "sample_sine_model", "contaminate", "kde_eval", "kde_eval_batch",
    "pearson_residual", "residual_report", "mle_fit", "wle_fit", "wle_step", "monitor",
    "run_trials", "summarize", "bivariate_scenario", "five_dim_scenario", "mean_direction",
    "mean_resultant_length", "circular_correlation", "VMTorusError", "EstimationError",
    "StrategyError", "DegenerateDirectionError", "DegenerateCorrelationError",
    "DegenerateSubsampleError",
]
