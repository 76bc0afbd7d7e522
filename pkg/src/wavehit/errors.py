"""Exception types shared across the package."""


class WavehitError(Exception):
    """Base class for all package errors."""


class ParameterError(WavehitError, ValueError):
    """Model or configuration parameters violate an invariant."""


class DimensionUnsupportedError(ParameterError):
    """Spatial dimension outside {1, 2, 3}."""


class InvalidDomainError(ParameterError):
    """A grid box or target set is degenerate or malformed."""


class QuadratureAccuracyError(WavehitError):
    """Radial quadrature did not reach the requested tolerance.

    The best available estimate and its error bound are attached so callers
    can decide whether to accept them.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ConditioningError(WavehitError):
    """Covariance factorization failed even at the largest jitter."""

    def __init__(self, message, jitter=None):
        super().__init__(message)
        self.jitter = jitter


class GridTooLargeError(ParameterError):
    """Dense sampling requested on more points than the supported cap."""


class OptimizationError(WavehitError):
    """Simplex optimizer failed to converge."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
