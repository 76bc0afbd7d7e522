"""Riesz-type kernels, discrete energies and capacity estimates.

K(r) = r^-gamma for gamma > 0, log(c / r) for gamma = 0 and 1 for gamma < 0.
Capacity is the reciprocal of the minimal energy over probability measures
on the set; here the measures are restricted to an atom cloud of spacing h
and the kernel is regularized as K(max(r, h/2)).  Refining h and
extrapolating removes most of the regularization bias.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import OptimizationError, ParameterError


@dataclass(frozen=True)
class RieszKernelSpec:
    gamma: float
    log_constant_c: float = 4.0
    domain_diameter: float = 0.0

    def __post_init__(self):
        if self.log_constant_c <= 0:
            raise ParameterError("log constant c must be positive")
        if self.gamma == 0 and self.log_constant_c <= self.domain_diameter:
            raise ParameterError(
                f"log constant c={self.log_constant_c} must exceed the domain diameter {self.domain_diameter}")

    @classmethod
    def for_set(cls, gamma, A):
        # c = 4 x diameter keeps the logarithmic kernel positive on A
        diam = A.diameter
        return cls(gamma=gamma, log_constant_c=4.0 * diam if diam > 0 else 1.0, domain_diameter=diam)


@dataclass
class DiscreteMeasure:
    atoms: np.ndarray
    weights: np.ndarray
    h: float

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ParameterError("weights must be non-negative and sum to 1")


@dataclass
class OptimizerResult:
    weights: np.ndarray
    energy: float
    history: list
    gap: float
    iterations: int


@dataclass
class CapacityEstimate:
    value: float
    energy: float
    optimizer: DiscreteMeasure = None
    trace: list = field(default_factory=list)


def kernel(spec, r):
    r = np.asarray(r, dtype=float)
    g = spec.gamma
    if g < 0:
        out = np.ones_like(r)
    else:
        out = np.full(r.shape, np.inf)
        pos = r > 0
        out[pos] = r[pos] ** -g if g > 0 else np.log(spec.log_constant_c / r[pos])
    return float(out) if out.ndim == 0 else out


def _pairwise(atoms):
    a = np.asarray(atoms, dtype=float)
    sq = np.sum(a * a, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * a @ a.T
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.maximum(d2, 0.0))


def kernel_matrix(spec, atoms, h):
    r = _pairwise(atoms)
    if h > 0:
        r = np.maximum(r, 0.5 * h)
    return kernel(spec, r)


def energy(spec, mu):
    if spec.gamma < 0:
        return 1.0
    K = kernel_matrix(spec, mu.atoms, mu.h)
    w = mu.weights
    with np.errstate(invalid="ignore"):
        live = w > 0
        return float(w[live] @ K[np.ix_(live, live)] @ w[live])


def project_simplex(v):
    """Euclidean projection onto {w >= 0, sum w = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def minimize_energy(K, max_iter=20000, rel_change=1e-10, gap_tol=1e-9):
    """Spectral projected gradient on the simplex with exact line search.

    Starts at the uniform measure.  Every accepted step is an exact minimizer
    of the quadratic along a feasible direction, so the energy history never
    increases.  Stops when the Frank-Wolfe duality gap (an upper bound on the
    suboptimality) or the relative energy change is small.  The regularized
    matrix need not be positive definite, so the result is a stationary
    point reached monotonically from a fixed start.
    """
    n = K.shape[0]
    w = np.full(n, 1.0 / n)
    Kw = K @ w
    E = float(w @ Kw)
    history = [E]
    step = 1.0 / max(np.abs(K).sum(axis=1).max(), 1e-300)
    gap = np.inf
    small = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * Kw
        gap = float(grad @ w - grad.min())
        if gap <= gap_tol * abs(E):
            break
        d = project_simplex(w - step * grad) - w
        Kd = K @ d
        curv = float(d @ Kd)
        slope = float(grad @ d)
        if slope >= 0 or curv <= 0:
            # fall back to a Frank-Wolfe vertex step
            d = -w.copy()
            d[int(np.argmin(grad))] += 1.0
            Kd = K @ d
            curv = float(d @ Kd)
            slope = float(grad @ d)
            if slope >= 0:
                break
        alpha = min(1.0, -slope / (2.0 * curv)) if curv > 0 else 1.0
        w_new = np.maximum(w + alpha * d, 0.0)
        w_new /= w_new.sum()
        Kw_new = K @ w_new
        E_new = float(w_new @ Kw_new)
        if E_new > E:
            E_new, w_new, Kw_new = E, w, Kw
            step *= 0.5
        s = alpha * d
        y = alpha * Kd
        sy = float(s @ y)
        step = float(s @ s) / (2.0 * sy) if sy > 0 else step
        change = (E - E_new) / abs(E) if E != 0 else 0.0
        w, Kw, E = w_new, Kw_new, E_new
        history.append(E)
        small = small + 1 if change < rel_change else 0
        if small >= 25:
            break
    else:
        raise OptimizationError(f"energy minimization did not converge in {max_iter} iterations",
                                trace=history)
    return OptimizerResult(weights=w, energy=E, history=history, gap=gap, iterations=it)


def _extrapolate(values):
    """Aitken delta-squared on the last three refinement values, if usable."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return float(v[-1])
    a, b, c = v[-3:]
    denom = (c - b) - (b - a)
    if denom == 0 or not np.isfinite(denom):
        return float(c)
    ratio = (c - b) / (b - a) if b != a else 0.0
    if not 0.0 < ratio < 1.0:
        return float(c)
    return float(c - (c - b) ** 2 / denom)


def estimate_capacity(A, spec, n_atoms=400, refinement_levels=3, max_atoms=6000):
    """Capacity of a target set from equilibrium measures on refining atom clouds.

    Level j uses spacing h_0 / 2^j where h_0 gives about ``n_atoms`` atoms.
    Levels whose cloud would exceed ``max_atoms`` are skipped.  The reported
    value is the Aitken-extrapolated limit of the level values.
    """
    if A.empty:
        return CapacityEstimate(value=0.0, energy=np.inf)
    if spec.gamma < 0:
        atoms = A.atoms(A.base_scale(1))[:1]
        mu = DiscreteMeasure(atoms, np.ones(1), A.base_scale(1))
        return CapacityEstimate(value=1.0, energy=1.0, optimizer=mu, trace=[(mu.h, 1.0)])
    h = A.base_scale(n_atoms)
    trace = []
    best = None
    for level in range(max(1, refinement_levels)):
        atoms = A.atoms(h)
        if level > 0 and atoms.shape[0] > max_atoms:
            break
        K = kernel_matrix(spec, atoms, h)
        res = minimize_energy(K)
        trace.append((h, 1.0 / res.energy))
        best = (atoms, res, h)
        h *= 0.5
    atoms, res, h_last = best
    value = max(_extrapolate([v for _, v in trace]), 0.0)
    mu = DiscreteMeasure(atoms, res.weights, h_last)
    return CapacityEstimate(value=value, energy=1.0 / value if value > 0 else np.inf, optimizer=mu, trace=trace)


def write_measure_csv(path, mu, meta=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta or {}):
            fh.write(f"# {key}: {meta[key]}\n")
        w = csv.writer(fh)
        w.writerow([f"a{j}" for j in range(mu.atoms.shape[1])] + ["weight"])
        for a, wt in zip(mu.atoms, mu.weights):
            w.writerow([repr(float(v)) for v in a] + [repr(float(wt))])
