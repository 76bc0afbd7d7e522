"""Second moments of one scalar component of the wave field.

The field solves the linear wave equation in R^k driven by Gaussian noise,
white in time, with spatial spectral density |xi|^(beta - k).  Every
component is an independent copy of the same centered Gaussian field, so
all quantities here are per component.

Fourier convention: F phi(xi) = int exp(-i xi.x) phi(x) dx.  The spectral
measure is used as is, so no (2 pi)^k factors appear; global constants
cancel in every exponent or ratio check.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _radial
from .errors import DimensionUnsupportedError, ParameterError


@dataclass(frozen=True)
class ModelParams:
    k: int
    beta: float
    d: int = 1
    t0: float = 0.5
    T: float = 2.0

    def __post_init__(self):
        if self.k not in (1, 2, 3):
            raise DimensionUnsupportedError(f"spatial dimension k={self.k} not in {{1, 2, 3}}")
        if not 0.0 < self.beta < min(2.0, self.k):
            raise ParameterError(
                f"noise exponent beta={self.beta} must satisfy 0 < beta < min(2, k) = {min(2, self.k)} "
                "(integrability of the spectral density against the wave kernel)")
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"field dimension d={self.d} must be an integer >= 1")
        if not 0.0 < self.t0 < self.T:
            raise ParameterError(f"time window needs 0 < t0 < T, got t0={self.t0}, T={self.T}")

    @property
    def holder_exponent(self):
        return (2.0 - self.beta) / 2.0


@dataclass(frozen=True)
class SpaceTimePoint:
    t: float
    x: tuple

    def __post_init__(self):
        if self.t < 0:
            raise ParameterError(f"time t={self.t} must be >= 0")
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the radial quadrature.

    ``tail_cutoff_policy="auto"`` lets the engine pick where panels stop and
    the analytic tail expansion takes over; ``"fixed"`` uses ``rho_max``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_panels: int = 400_000
    tail_cutoff_policy: str = "auto"
    rho_max: Optional[float] = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("quadrature tolerances must be positive")
        if self.max_panels < 1:
            raise ParameterError("max_panels must be >= 1")
        if self.tail_cutoff_policy not in ("auto", "fixed"):
            raise ParameterError(f"unknown tail cutoff policy {self.tail_cutoff_policy!r}")
        if self.tail_cutoff_policy == "fixed" and not (self.rho_max and self.rho_max > 0):
            raise ParameterError("fixed tail cutoff needs rho_max > 0")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class MetricValue:
    delta_sq: float
    error_estimate: float
    clamped: bool = field(default=False)


# ------------------------------------------------------- scalar primitives

def fourier_g(t, rho):
    """sin(t rho) / rho, equal to t at rho = 0."""
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    out = t * _radial.sinc(t * rho)
    return float(out) if out.ndim == 0 else out


def time_integral_var(t, rho):
    """int_0^t sin^2((t - u) rho) du = t/2 - sin(2 t rho)/(4 rho).

    Evaluated as 2 t^3 rho^2 chi(2 t rho) with chi(y) = (y - sin y)/y^3, which
    is free of cancellation for small rho (limit t^3 rho^2 / 3).
    """
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    out = 2.0 * t**3 * rho**2 * _radial.chi(2.0 * t * rho)
    return float(out) if out.ndim == 0 else out


def time_integral_cross(s, t, rho):
    """int_0^min(s,t) sin((t - u) rho) sin((s - u) rho) du, symmetric in s, t."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    m, M = np.minimum(s, t), np.maximum(s, t)
    out = rho**2 * _radial.t_over_rho2(m, M, rho)
    return float(out) if out.ndim == 0 else out


def angular_kernel(k, rho, r):
    """Average of exp(i xi.z) over the sphere |xi| = rho, for |z| = r."""
    out = _radial.angular(k, np.asarray(rho, dtype=float) * np.asarray(r, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------------ field moments

def _as_xt(t, x, k):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1 and k == 1:
        x = x.reshape(-1, 1)
    x = np.atleast_2d(x)
    if x.shape[-1] != k:
        raise ParameterError(f"spatial points must have {k} coordinates, got shape {x.shape}")
    return t, x


def _check_times(t, model):
    if np.any(t < 0) or np.any(t > model.T * (1 + 1e-12)):
        raise ParameterError(f"times must lie in [0, T={model.T}]")


def covariance_array(t1, x1, t2, x2, model, quad=None):
    """Vectorized covariance of u(t1, x1) and u(t2, x2); returns (value, error)."""
    t1, x1 = _as_xt(t1, x1, model.k)
    t2, x2 = _as_xt(t2, x2, model.k)
    _check_times(t1, model)
    _check_times(t2, model)
    r = np.linalg.norm(x1 - x2, axis=-1)
    m, M = np.minimum(t1, t2), np.maximum(t1, t2)
    m, M, r = np.broadcast_arrays(m, M, r)
    return _radial.radial_integral("cov", model.k, model.beta, m, M, r, quad or DEFAULT_QUAD)


def metric_sq_array(t1, x1, t2, x2, model, quad=None):
    """Vectorized E(u(t1,x1) - u(t2,x2))^2 per component; returns (value, error)."""
    t1, x1 = _as_xt(t1, x1, model.k)
    t2, x2 = _as_xt(t2, x2, model.k)
    _check_times(t1, model)
    _check_times(t2, model)
    r = np.linalg.norm(x1 - x2, axis=-1)
    m, M = np.minimum(t1, t2), np.maximum(t1, t2)
    m, M, r = np.broadcast_arrays(m, M, r)
    return _radial.radial_integral("dsq", model.k, model.beta, m, M, r, quad or DEFAULT_QUAD)


def variance_array(t, model, quad=None):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_times(t, model)
    return _radial.radial_integral("cov", model.k, model.beta, t, t, np.zeros_like(t), quad or DEFAULT_QUAD)


def covariance(p, q, model, quad=None):
    value, _ = covariance_array(p.t, [p.x], q.t, [q.x], model, quad)
    return float(value[0])


def variance(p, model, quad=None):
    """Variance of u(t, x); the location x does not enter."""
    value, _ = variance_array(p.t, model, quad)
    return float(value[0])


def canonical_metric_sq(p, q, model, quad=None):
    """Squared canonical distance between (t, x) and (s, y) for one component.

    Computed from the integrand of the increment itself, which avoids the
    cancellation in var + var - 2 cov at small separations.
    """
    value, err = metric_sq_array(p.t, [p.x], q.t, [q.x], model, quad)
    v, e = float(value[0]), float(err[0])
    if v < 0:
        return MetricValue(0.0, max(e, -v), clamped=True)
    return MetricValue(v, e)
