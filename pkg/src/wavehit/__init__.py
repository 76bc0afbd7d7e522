"""Gaussian wave-equation fields driven by spatially correlated noise: covariance
quadrature, exact lattice sampling, capacities, Hausdorff covers and hitting
probabilities."""

from .errors import (ConditioningError, DimensionUnsupportedError, GridTooLargeError, InvalidDomainError,
                     OptimizationError, ParameterError, QuadratureAccuracyError, WavehitError)
from .spectral_core import (DEFAULT_QUAD, MetricValue, ModelParams, QuadratureSpec, SpaceTimePoint,
                            canonical_metric_sq, covariance, variance)

__version__ = "0.1.0"

__all__ = ["ConditioningError", "DEFAULT_QUAD", "DimensionUnsupportedError", "GridTooLargeError",
           "InvalidDomainError", "MetricValue", "ModelParams", "OptimizationError", "ParameterError",
           "QuadratureAccuracyError", "QuadratureSpec", "SpaceTimePoint", "WavehitError",
           "canonical_metric_sq", "covariance", "variance"]
