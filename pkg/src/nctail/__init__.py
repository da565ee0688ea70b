"""Noncentral t distribution: CDF by direct quadrature, with PDF, quantiles,
parameter solvers and reference algorithms."""
from .core import (DEFAULT_CONFIG, IntegrationWindow, NctParams, Tail, TailProbability,
                   ToleranceConfig, cdf, cdf_lower, cdf_upper, integrand_g, integrand_g_upper,
                   log_integrand_h, mode_zmod, pdf, quantile, solve_delta, solve_nu, window)
from .errors import ConvergenceError, DomainError, NctError, NumericError, RangeError

__all__ = [
    "DEFAULT_CONFIG", "IntegrationWindow", "NctParams", "Tail", "TailProbability",
    "ToleranceConfig", "cdf", "cdf_lower", "cdf_upper", "integrand_g", "integrand_g_upper",
    "log_integrand_h", "mode_zmod", "pdf", "quantile", "solve_delta", "solve_nu", "window",
    "ConvergenceError", "DomainError", "NctError", "NumericError", "RangeError",
]
__version__ = "0.1.0"
