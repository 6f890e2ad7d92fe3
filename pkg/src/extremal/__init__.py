"""Stationary time-series models with generalized Pareto marginals."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    ExplosionError,
    ExtremalError,
    NumericalError,
    ParameterError,
)
from .gc import GcParams, gc_fit, gc_simulate
from .glm import GlmParams, glm_fit, glm_simulate
from .gpd import GpdParams, extract_exceedances, gpd_cdf, gpd_fit_marginal, gpd_fit_mle, gpd_quantile, gpd_sample
from .pipeline import Path, detrend_deseasonalize, load_csv
from .rng import RandomStream
from .snt import SntParams, snt_fit, snt_fit_with_marginal, snt_simulate
from .ssm import SsmParams, ssm_fit, ssm_simulate

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "DataError", "ExplosionError", "ExtremalError", "NumericalError",
    "ParameterError", "GcParams", "gc_fit", "gc_simulate", "GlmParams", "glm_fit", "glm_simulate",
    "GpdParams", "extract_exceedances", "gpd_cdf", "gpd_fit_marginal", "gpd_fit_mle", "gpd_quantile",
    "gpd_sample", "Path", "detrend_deseasonalize", "load_csv", "RandomStream", "SntParams", "snt_fit",
    "snt_fit_with_marginal", "snt_simulate", "SsmParams", "ssm_fit", "ssm_simulate",
]
