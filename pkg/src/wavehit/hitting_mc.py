"""Monte Carlo hitting probabilities of target sets by the sampled field.

A replicate hits ``A`` when some grid value lies within ``eta`` of ``A``.
All targets of one experiment are evaluated on the same realizations; this
makes comparisons across targets and enlargements pathwise, so inclusions
between targets translate into exact inequalities between hit counts.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import ParameterError
from .field_sampler import GridBox, assemble_cov, build_grid, sample_replicates
from .spectral_core import metric_sq_array

_Z95 = float(norm.ppf(0.975))


@dataclass
class HitExperiment:
    model: object
    grid: object
    target: object
    eta: float = 0.0
    replicates: int = 1000
    seed: int = 0
    threads: int = 1
    block: int = 256

    def __post_init__(self):
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        if self.eta < 0:
            raise ParameterError("enlargement must be >= 0")
        box, m = self.grid.box, self.model
        if box.t_lo < m.t0 - 1e-12 or box.t_hi > m.T + 1e-12:
            raise ParameterError(f"grid times [{box.t_lo}, {box.t_hi}] leave the window [{m.t0}, {m.T}]")


@dataclass
class HittingEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    hits: int
    replicates: int
    eta: float = 0.0
    extra: dict = field(default_factory=dict)


def wilson_interval(hits, n, z=_Z95):
    if n == 0:
        return 0.0, 1.0
    p = hits / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if hits == 0 else max(0.0, centre - half)
    hi = 1.0 if hits == n else min(1.0, centre + half)
    return float(lo), float(hi)


def estimate_from_hits(hits, n, eta=0.0):
    lo, hi = wilson_interval(int(hits), int(n))
    p = hits / n
    return HittingEstimate(p_hat=float(p), ci_low=float(min(lo, p)), ci_high=float(max(hi, p)), hits=int(hits),
                           replicates=int(n), eta=float(eta))


def cell_enlargement(grid, model, kappa=1.0):
    """Typical scalar field increment between a point and its grid node.

    Within a cell the parameter point farthest from the anchor node is the
    cell centre, half a step along every axis.  The canonical distance of
    that offset, root-mean-squared over every cell of the lattice, is the
    expected largest increment of one component inside a cell.  One
    component is the right scale because the gap between the grid minimum
    and the continuum minimum of the distance to a target is the increment
    projected on a single direction.
    """
    half = 0.5 * grid.spacing()
    if not np.any(half > 0):
        return 0.0
    t = grid.times[:-1] if grid.times.size > 1 else grid.times
    x0 = np.zeros((t.size, grid.x.shape[1]))
    dsq, _ = metric_sq_array(t, x0, t + half[0], x0 + half[1:], model)
    return float(kappa * np.sqrt(np.mean(dsq)))


def min_distances(model, grid, targets, replicates, seed, cov=None, threads=1, block=256):
    """Per-replicate minimum distance from the sampled range to each target.

    Returns an array (len(targets), replicates); empty targets give +inf.
    """
    cov = cov or assemble_cov(grid, model)
    out = np.full((len(targets), replicates), np.inf)
    for lo in range(0, replicates, block):
        hi = min(lo + block, replicates)
        u = sample_replicates(cov, model.d, seed, np.arange(lo, hi), threads=threads, block=block)
        flat = u.reshape(-1, model.d)
        for j, A in enumerate(targets):
            if A.empty:
                continue
            out[j, lo:hi] = A.distance(flat).reshape(hi - lo, -1).min(axis=1)
    return out


def run_hit(exp, cov=None):
    dist = min_distances(exp.model, exp.grid, [exp.target], exp.replicates, exp.seed,
                         cov=cov, threads=exp.threads, block=exp.block)[0]
    return estimate_from_hits(np.count_nonzero(dist <= exp.eta), exp.replicates, exp.eta)


def run_hit_schedule(model, grid, targets, etas, replicates, seed, cov=None, threads=1):
    """Estimates for every (target, eta) on one shared set of realizations."""
    dist = min_distances(model, grid, targets, replicates, seed, cov=cov, threads=threads)
    return [[estimate_from_hits(np.count_nonzero(dj <= e), replicates, e) for e in etas] for dj in dist]


def slice_grid(box, kind, where, n_nodes):
    """Fixed-time or fixed-space sub-lattice of ``box`` with ``n_nodes`` per free axis."""
    if kind == "fixed_time":
        return build_grid(GridBox(where, where, box.x_lo, box.x_hi), 1, n_nodes)
    if kind == "fixed_space":
        x = tuple(np.atleast_1d(where).astype(float))
        return build_grid(GridBox(box.t_lo, box.t_hi, x, x), n_nodes, 1)
    raise ParameterError(f"unknown slice kind {kind!r}")


def run_slice_hit(exp, kind, where, n_nodes=None):
    """Hitting estimate on a time or space slice of the experiment's box."""
    n_nodes = n_nodes or max(exp.grid.shape)
    grid = slice_grid(exp.grid.box, kind, where, n_nodes)
    sub = HitExperiment(exp.model, grid, exp.target, exp.eta, exp.replicates, exp.seed, exp.threads, exp.block)
    return run_hit(sub)


def write_hits_csv(path, rows, meta=None):
    """Rows are (r, HittingEstimate)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta or {}):
            fh.write(f"# {key}: {meta[key]}\n")
        w = csv.writer(fh)
        w.writerow(["r", "p_hat", "ci_low", "ci_high", "hits", "replicates", "eta"])
        for r, est in rows:
            w.writerow([repr(float(r)), repr(est.p_hat), repr(est.ci_low), repr(est.ci_high),
                        est.hits, est.replicates, repr(est.eta)])
