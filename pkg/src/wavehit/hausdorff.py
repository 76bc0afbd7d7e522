"""Covering estimates of Hausdorff measures.

For each eps in a decreasing schedule the set is covered by balls of radius
at most eps and sum (2 r_i)^gamma is recorded.  The reported value is the
minimum over the schedule.  Every entry is the cost of a genuine cover, so
the estimate bounds the eps-premeasure at the largest scale from above.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .targets import Ball, Box, CantorDust, Point, PointCloud, TargetSet, Union, segment

__all__ = ["HausdorffEstimate", "estimate_hausdorff", "membership", "write_estimates_csv", "Ball", "Box",
           "CantorDust", "Point", "PointCloud", "TargetSet", "Union", "segment"]


@dataclass
class HausdorffEstimate:
    gamma: float
    upper_estimates: list = field(default_factory=list)
    value: float = np.inf


def membership(A, z, eta=0.0):
    """True where dist(z, A) <= eta; ``z`` may hold one point or many rows."""
    if A.empty:
        out = np.zeros(np.atleast_2d(z).shape[0], dtype=bool)
    else:
        out = A.contains(z, eta)
    return bool(out[0]) if np.ndim(z) == 1 and out.size == 1 else out


def _cover_sum(A, gamma, eps):
    radii = A.cover(eps)
    if radii.size == 0:
        return 0.0
    return float(np.sum((2.0 * radii) ** gamma))


def _sums(A, gamma, eps_schedule):
    if isinstance(A, Union):
        # each part may use its best cover at any admissible radius <= eps
        per = [np.minimum.accumulate(_sums(p, gamma, eps_schedule)[::-1])[::-1] for p in A.parts]
        return np.sum(per, axis=0)
    return np.array([_cover_sum(A, gamma, e) for e in eps_schedule])


def estimate_hausdorff(A, gamma, eps_schedule):
    eps = np.asarray(eps_schedule, dtype=float)
    if eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ParameterError("eps schedule must be positive and strictly decreasing")
    if gamma < 0:
        return HausdorffEstimate(gamma=gamma, upper_estimates=[], value=np.inf)
    if A.empty:
        return HausdorffEstimate(gamma=gamma, upper_estimates=[(float(e), 0.0) for e in eps], value=0.0)
    sums = _sums(A, gamma, eps)
    trace = [(float(e), float(s)) for e, s in zip(eps, sums)]
    return HausdorffEstimate(gamma=gamma, upper_estimates=trace, value=float(np.min(sums)))


def write_estimates_csv(path, estimates, meta=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta or {}):
            fh.write(f"# {key}: {meta[key]}\n")
        w = csv.writer(fh)
        w.writerow(["gamma", "eps", "sum", "value"])
        for est in estimates:
            for e, s in est.upper_estimates:
                w.writerow([repr(est.gamma), repr(e), repr(s), repr(est.value)])
