"""Exact Gaussian sampling of the d-component field on space-time lattices.

A realization is ``L z`` with ``L`` the Cholesky factor of the per-component
Gram matrix and ``z`` standard normals.  The normals for replicate ``rep`` and
component ``col`` come from a Philox4x64 stream with key ``(seed, 0)`` and
initial counter ``(0, rep, col, 0)``: the top 53 bits of each raw 64-bit word
give a uniform ``(w + 0.5) / 2^53`` which is mapped through the inverse normal
CDF.  Every stream is therefore addressable on its own, and outputs do not
depend on the order in which replicates are produced or on threading.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky
from scipy.special import ndtri

from . import _radial
from .errors import ConditioningError, GridTooLargeError, InvalidDomainError, ParameterError
from .spectral_core import DEFAULT_QUAD

MAX_POINTS = 4096
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GridBox:
    """Parameter box [t_lo, t_hi] x prod [x_lo[l], x_hi[l]]."""

    t_lo: float
    t_hi: float
    x_lo: tuple
    x_hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "x_lo", tuple(float(v) for v in np.atleast_1d(self.x_lo)))
        object.__setattr__(self, "x_hi", tuple(float(v) for v in np.atleast_1d(self.x_hi)))
        if len(self.x_lo) != len(self.x_hi):
            raise InvalidDomainError("box corners have different dimensions")

    @property
    def k(self):
        return len(self.x_lo)


@dataclass
class FieldGrid:
    """Tensor lattice in lexicographic order: time slowest, then x axis 0, 1, ..."""

    box: GridBox
    times: np.ndarray
    axes: list
    t: np.ndarray
    x: np.ndarray

    @property
    def n(self):
        return self.t.shape[0]

    @property
    def shape(self):
        return (self.times.size,) + tuple(a.size for a in self.axes)

    def index(self, i_t, *i_x):
        return int(np.ravel_multi_index((i_t,) + tuple(i_x), self.shape))

    def spacing(self):
        """Lattice step per axis (time first); 0 for single-node axes."""
        return np.array([_step(a) for a in [self.times] + list(self.axes)])


def _step(a):
    return float(a[1] - a[0]) if a.size > 1 else 0.0


def _axis(lo, hi, n, name):
    if n < 1 or int(n) != n:
        raise ParameterError(f"{name}: node count must be a positive integer, got {n}")
    if hi < lo:
        raise InvalidDomainError(f"{name}: upper end {hi} below lower end {lo}")
    if n > 1 and hi == lo:
        raise InvalidDomainError(f"{name}: zero-length side with {n} nodes")
    return np.linspace(lo, hi, int(n)) if n > 1 else np.array([float(lo)])


def build_grid(box, n_t, n_x):
    """Uniform lattice on ``box``; an axis with one node sits at its lower end.

    ``n_x`` is an int (same count on every spatial axis) or a sequence.
    """
    n_x = [n_x] * box.k if np.isscalar(n_x) else list(n_x)
    if len(n_x) != box.k:
        raise ParameterError(f"need {box.k} spatial node counts, got {len(n_x)}")
    times = _axis(box.t_lo, box.t_hi, n_t, "time")
    axes = [_axis(lo, hi, n, f"x[{l}]") for l, (lo, hi, n) in enumerate(zip(box.x_lo, box.x_hi, n_x))]
    if box.t_lo < 0:
        raise InvalidDomainError("grid times must be >= 0")
    mesh = np.meshgrid(times, *axes, indexing="ij")
    t = mesh[0].ravel()
    x = np.stack([g.ravel() for g in mesh[1:]], axis=1)
    return FieldGrid(box=box, times=times, axes=axes, t=t, x=x)


def grid_from_points(t, x):
    """Wrap an explicit list of points (no tensor structure) as a grid."""
    t = np.asarray(t, dtype=float).ravel()
    x = np.asarray(x, dtype=float).reshape(t.size, -1)
    if t.size == 0:
        raise InvalidDomainError("empty point set")
    if np.unique(np.column_stack([t, x]), axis=0).shape[0] < t.size:
        raise InvalidDomainError("grid points must be pairwise distinct")
    box = GridBox(t.min(), t.max(), x.min(axis=0), x.max(axis=0))
    return FieldGrid(box=box, times=np.unique(t), axes=[np.unique(c) for c in x.T], t=t, x=x)


@dataclass
class CovMatrix:
    matrix: np.ndarray
    factor: np.ndarray
    jitter_applied: float = 0.0
    max_quad_error: float = 0.0


@dataclass
class FieldSample:
    values: np.ndarray
    seed: int
    replicate_id: int


# ------------------------------------------------------------ covariance

def pair_moments(kind, t1, x1, t2, x2, model, quad=None, decimals=12):
    """Radial integrals for many point pairs, evaluated once per distinct
    (min time, max time, distance) triple."""
    r = np.linalg.norm(np.atleast_2d(x1) - np.atleast_2d(x2), axis=-1)
    m, M = np.minimum(t1, t2), np.maximum(t1, t2)
    m, M, r = np.broadcast_arrays(m, M, r)
    keys = np.round(np.stack([m.ravel(), M.ravel(), r.ravel()], axis=1), decimals)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    val, err = _radial.radial_integral(kind, model.k, model.beta, uniq[:, 0], uniq[:, 1], uniq[:, 2],
                                       quad or DEFAULT_QUAD)
    inv = inv.ravel()
    return val[inv].reshape(m.shape), err[inv].reshape(m.shape)


def gram_matrix(t, x, model, quad=None):
    n = t.shape[0]
    iu, ju = np.triu_indices(n)
    val, err = pair_moments("cov", t[iu], x[iu], t[ju], x[ju], model, quad)
    C = np.zeros((n, n))
    C[iu, ju] = val
    C[ju, iu] = val
    return C, float(err.max()) if err.size else 0.0


def factorize(C):
    """Cholesky with the escalating diagonal jitter ladder."""
    n = C.shape[0]
    scale = np.trace(C) / n if n else 0.0
    scale = scale if scale > 0 else 1.0
    for j in JITTER_LADDER:
        jitter = j * scale
        try:
            L = cholesky(C + jitter * np.eye(n), lower=True, check_finite=True)
        except np.linalg.LinAlgError:
            continue
        return L, jitter
    raise ConditioningError(f"Cholesky failed at jitter {JITTER_LADDER[-1]:g} * tr/n", jitter=JITTER_LADDER[-1] * scale)


def assemble_cov(grid, model, quad=None):
    if grid.n == 0:
        raise InvalidDomainError("empty grid")
    if grid.n > MAX_POINTS:
        raise GridTooLargeError(f"{grid.n} grid points exceeds the dense cap of {MAX_POINTS}")
    C, qerr = gram_matrix(grid.t, grid.x, model, quad)
    L, jitter = factorize(C)
    return CovMatrix(matrix=C, factor=L, jitter_applied=jitter, max_quad_error=qerr)


# -------------------------------------------------------------- sampling

def normal_stream(seed, replicate_id, column, n):
    """``n`` standard normals from the stream addressed by the three keys."""
    key = np.array([int(seed) & _MASK64, 0], dtype=np.uint64)
    counter = np.array([0, int(replicate_id) & _MASK64, int(column) & _MASK64, 0], dtype=np.uint64)
    raw = np.random.Philox(key=key, counter=counter).random_raw(n)
    u = ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
    return ndtri(u)


def normals(seed, replicate_ids, d, n):
    """Array (len(replicate_ids), n, d) of stream normals."""
    reps = np.atleast_1d(replicate_ids)
    out = np.empty((reps.size, n, d))
    for i, rep in enumerate(reps):
        for c in range(d):
            out[i, :, c] = normal_stream(seed, rep, c, n)
    return out


def sample_field(cov, d, seed, replicate_id):
    z = normals(seed, [replicate_id], d, cov.factor.shape[0])[0]
    return FieldSample(values=cov.factor @ z, seed=int(seed), replicate_id=int(replicate_id))


def sample_replicates(cov, d, seed, replicate_ids, threads=None, block=256):
    """Field values for many replicates, shape (reps, n, d).

    Work is split into blocks of replicates; each block is independent, so the
    result is identical for any ``threads``.
    """
    reps = np.atleast_1d(np.asarray(replicate_ids))
    n = cov.factor.shape[0]
    out = np.empty((reps.size, n, d))
    L = cov.factor

    def run(lo):
        hi = min(lo + block, reps.size)
        z = normals(seed, reps[lo:hi], d, n)
        out[lo:hi] = np.einsum("ij,rjc->ric", L, z, optimize=True)

    starts = range(0, reps.size, block)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(run, starts))
    else:
        for lo in starts:
            run(lo)
    return out


# ------------------------------------------------------------------ export

def _write(path, meta, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}: {meta[key]}\n")
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def grid_metadata(grid):
    return {"n_points": grid.n, "shape": "x".join(map(str, grid.shape)),
            "t_range": f"{grid.box.t_lo}:{grid.box.t_hi}",
            "x_lo": ";".join(map(repr, grid.box.x_lo)), "x_hi": ";".join(map(repr, grid.box.x_hi))}


def write_cov_csv(path, cov, grid, extra=None):
    meta = grid_metadata(grid) | {"jitter_applied": repr(cov.jitter_applied)} | (extra or {})
    header = ["i"] + [f"c{j}" for j in range(grid.n)]
    rows = ([i] + [repr(float(v)) for v in row] for i, row in enumerate(cov.matrix))
    _write(path, meta, header, rows)


def write_sample_csv(path, sample, grid, extra=None):
    meta = grid_metadata(grid) | {"seed": sample.seed, "replicate_id": sample.replicate_id} | (extra or {})
    d = sample.values.shape[1]
    header = ["t"] + [f"x{l}" for l in range(grid.x.shape[1])] + [f"u{c}" for c in range(d)]
    rows = ([repr(float(v)) for v in np.concatenate([[t], x, u])]
            for t, x, u in zip(grid.t, grid.x, sample.values))
    _write(path, meta, header, rows)
