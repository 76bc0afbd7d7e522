"""Target sets in R^d: exact distances, ball covers and atom clouds.

Each set provides

* ``distance(z)``: Euclidean distance from each row of ``z`` to the set,
* ``cover(eps)``: radii of a cover by balls of radius <= eps,
* ``atoms(h)``: a deterministic point cloud with spacing about ``h``,
* ``base_scale(n_atoms)``: the spacing giving roughly ``n_atoms`` atoms.
"""

from dataclasses import dataclass
from math import ceil, log

import numpy as np

from .errors import InvalidDomainError

# distances below this (relative to the set size) count as zero
_REL_EPS = 1e-12


def _rows(z, dim):
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z.reshape(1, -1) if z.size == dim else z.reshape(-1, dim)
    if z.shape[-1] != dim:
        raise InvalidDomainError(f"points must have {dim} coordinates, got shape {z.shape}")
    return z


def _lattice(lo, hi, h):
    """Cell-centred lattice of spacing at most h on a box (degenerate axes allowed)."""
    axes = []
    for a, b in zip(lo, hi):
        n = max(1, int(ceil((b - a) / h - 1e-9)))
        axes.append(a + (np.arange(n) + 0.5) * (b - a) / n if b > a else np.array([a]))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


class TargetSet:
    dim: int

    def contains(self, z, eta=0.0):
        return self.distance(z) <= eta + _REL_EPS * max(1.0, self.diameter)

    @property
    def empty(self):
        return False

    @property
    def diameter(self):
        raise NotImplementedError

    def cover(self, eps):
        raise NotImplementedError

    def atoms(self, h):
        raise NotImplementedError

    def base_scale(self, n_atoms):
        raise NotImplementedError


@dataclass(frozen=True)
class Point(TargetSet):
    z: tuple

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in np.atleast_1d(self.z)))

    @property
    def dim(self):
        return len(self.z)

    @property
    def diameter(self):
        return 0.0

    def distance(self, z):
        return np.linalg.norm(_rows(z, self.dim) - np.array(self.z), axis=-1)

    def cover(self, eps):
        return np.zeros(1)

    def atoms(self, h):
        return np.array([self.z])

    def base_scale(self, n_atoms):
        return 1.0 / max(n_atoms, 1)


@dataclass(frozen=True)
class Ball(TargetSet):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if self.radius < 0:
            raise InvalidDomainError(f"ball radius {self.radius} < 0")

    @property
    def dim(self):
        return len(self.center)

    @property
    def diameter(self):
        return 2.0 * self.radius

    def distance(self, z):
        return np.maximum(np.linalg.norm(_rows(z, self.dim) - np.array(self.center), axis=-1) - self.radius, 0.0)

    def cover(self, eps, max_cells=20_000_000):
        if eps >= self.radius:
            return np.array([self.radius])
        # cubes of side a have circumscribed radius eps; keep those meeting the ball
        d = self.dim
        a = 2.0 * eps / np.sqrt(d)
        n = int(ceil(self.radius / a))
        if (2 * n) ** d > max_cells:
            raise InvalidDomainError(f"cover of a ball at eps={eps} needs more than {max_cells} cells")
        # distance from the centre to a cube [j a, (j+1) a] along one axis
        j = np.arange(-n, n)
        gap = np.maximum(0.0, np.maximum(j * a, -(j + 1) * a)) ** 2
        acc = gap
        for _ in range(d - 1):
            acc = (acc[..., None] + gap).reshape(-1)
        count = int(np.count_nonzero(acc <= self.radius**2))
        return np.full(count, eps)

    def atoms(self, h):
        d, r = self.dim, self.radius
        if r == 0:
            return np.array([self.center])
        n = int(ceil(r / h))
        g = _lattice([-n * h] * d, [n * h] * d, h)
        norm = np.linalg.norm(g, axis=1)
        inner = g[norm < r - 0.5 * h]
        shell = g[(norm >= r - 0.5 * h) & (norm < r + 0.5 * h)]
        shell = r * shell / np.linalg.norm(shell, axis=1, keepdims=True)
        pts = np.concatenate([inner, shell]) if inner.size else shell
        return pts + np.array(self.center)

    def base_scale(self, n_atoms):
        if self.radius == 0:
            return 1.0 / max(n_atoms, 1)
        vol_frac = np.pi ** (self.dim / 2) / _gamma_half(self.dim) / 2**self.dim
        return self.diameter * (vol_frac / max(n_atoms, 1)) ** (1.0 / self.dim)


def _gamma_half(d):
    from math import gamma
    return gamma(d / 2 + 1)


@dataclass(frozen=True)
class Box(TargetSet):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))
        if len(self.lo) != len(self.hi) or any(b < a for a, b in zip(self.lo, self.hi)):
            raise InvalidDomainError("box needs lo <= hi componentwise")

    @property
    def dim(self):
        return len(self.lo)

    @property
    def sides(self):
        return np.array(self.hi) - np.array(self.lo)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.sides))

    def distance(self, z):
        z = _rows(z, self.dim)
        gap = np.maximum(np.array(self.lo) - z, 0.0) + np.maximum(z - np.array(self.hi), 0.0)
        return np.linalg.norm(gap, axis=-1)

    def cover(self, eps):
        sides = self.sides
        live = sides > 0
        if not live.any():
            return np.zeros(1)
        a = 2.0 * eps / np.sqrt(live.sum())
        counts = np.where(live, np.ceil(sides / a - 1e-12), 1).astype(int)
        cell = np.where(live, sides / counts, 0.0)
        return np.full(int(np.prod(counts)), 0.5 * float(np.linalg.norm(cell)))

    def atoms(self, h):
        return _lattice(self.lo, self.hi, h)

    def base_scale(self, n_atoms):
        sides = self.sides[self.sides > 0]
        if sides.size == 0:
            return 1.0 / max(n_atoms, 1)
        return float((np.prod(sides) / max(n_atoms, 1)) ** (1.0 / sides.size))


@dataclass(frozen=True)
class PointCloud(TargetSet):
    points: tuple
    dim_: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        dim = self.dim_ or (pts.shape[-1] if pts.size else 1)
        pts = pts.reshape(-1, dim)
        object.__setattr__(self, "points", tuple(map(tuple, pts)))
        object.__setattr__(self, "dim_", dim)

    @property
    def dim(self):
        return self.dim_

    @property
    def array(self):
        return np.asarray(self.points, dtype=float).reshape(-1, self.dim)

    @property
    def empty(self):
        return len(self.points) == 0

    @property
    def diameter(self):
        p = self.array
        if len(p) < 2:
            return 0.0
        return float(np.max(np.linalg.norm(p[:, None] - p[None], axis=-1)))

    def distance(self, z):
        z = _rows(z, self.dim)
        p = self.array
        if p.size == 0:
            return np.full(z.shape[0], np.inf)
        best = np.full(z.shape[0], np.inf)
        for chunk in np.array_split(p, max(1, len(p) // 256)):
            best = np.minimum(best, np.linalg.norm(z[:, None] - chunk[None], axis=-1).min(axis=1))
        return best

    def cover(self, eps):
        """Greedy farthest-point cover; each radius is the cluster's actual extent."""
        p = self.array
        if p.size == 0:
            return np.zeros(0)
        centres = [0]
        dist = np.linalg.norm(p - p[0], axis=1)
        owner = np.zeros(len(p), dtype=int)
        while dist.max() > eps:
            j = int(np.argmax(dist))
            centres.append(j)
            dj = np.linalg.norm(p - p[j], axis=1)
            closer = dj < dist
            owner[closer] = len(centres) - 1
            dist = np.minimum(dist, dj)
        radii = np.zeros(len(centres))
        np.maximum.at(radii, owner, dist)
        return radii

    def atoms(self, h):
        return self.array

    def base_scale(self, n_atoms):
        p = self.array
        if len(p) < 2:
            return 1.0 / max(n_atoms, 1)
        dd = np.linalg.norm(p[:, None] - p[None], axis=-1)
        np.fill_diagonal(dd, np.inf)
        return float(dd.min())


@dataclass(frozen=True)
class CantorDust(TargetSet):
    """Middle-gap Cantor set on [a, b] along axis 0 of R^dim, cut ``depth`` times."""

    interval: tuple = (0.0, 1.0)
    ratio: float = 1.0 / 3.0
    depth: int = 8
    dim_: int = 1

    def __post_init__(self):
        a, b = map(float, self.interval)
        object.__setattr__(self, "interval", (a, b))
        if not b > a:
            raise InvalidDomainError("Cantor interval must have positive length")
        if not 0.0 < self.ratio < 0.5:
            raise InvalidDomainError(f"Cantor ratio {self.ratio} not in (0, 1/2)")
        if self.depth < 0 or self.dim_ < 1:
            raise InvalidDomainError("Cantor depth must be >= 0 and dimension >= 1")

    @property
    def dim(self):
        return self.dim_

    @property
    def length(self):
        return self.interval[1] - self.interval[0]

    @property
    def diameter(self):
        return self.length

    @property
    def similarity_dimension(self):
        return log(2.0) / log(1.0 / self.ratio)

    def intervals(self, level):
        level = min(level, self.depth)
        lo = np.array([self.interval[0]])
        L = self.length
        for _ in range(level):
            step = L * (1.0 - self.ratio)
            lo = np.concatenate([lo, lo + step])
            L *= self.ratio
        return np.sort(lo), L

    def _distance_1d(self, s):
        a, b = self.interval
        lo = np.full(s.shape, a)
        L = self.length
        out = np.where(s < a, a - s, np.where(s > b, s - b, 0.0))
        live = (s >= a) & (s <= b)
        for _ in range(self.depth):
            child = self.ratio * L
            left_end = lo + child
            right_start = lo + L - child
            gap = live & (s > left_end) & (s < right_start)
            out = np.where(gap, np.minimum(s - left_end, right_start - s), out)
            live &= ~gap
            lo = np.where(s >= right_start, right_start, lo)
            L = child
        return out

    def distance(self, z):
        z = _rows(z, self.dim)
        d1 = self._distance_1d(z[:, 0])
        return np.sqrt(d1**2 + np.sum(z[:, 1:] ** 2, axis=1))

    def cover(self, eps):
        # coarsest level whose intervals fit in a ball of radius eps
        level, L = 0, self.length
        while 0.5 * L > eps and level < self.depth:
            level += 1
            L *= self.ratio
        count = 2**level
        if 0.5 * L <= eps:
            return np.full(count, 0.5 * L)
        per = int(ceil(L / (2.0 * eps) - 1e-12))
        return np.full(count * per, 0.5 * L / per)

    def atoms(self, h):
        level, L = 0, self.length
        while L > h and level < self.depth:
            level += 1
            L *= self.ratio
        lo, L = self.intervals(level)
        per = max(1, int(ceil(L / h - 1e-9)))
        s = (lo[:, None] + (np.arange(per) + 0.5) * L / per).ravel()
        out = np.zeros((s.size, self.dim))
        out[:, 0] = s
        return out

    def base_scale(self, n_atoms):
        level = min(self.depth, max(0, int(np.floor(np.log2(max(n_atoms, 1))))))
        return self.length * self.ratio**level


@dataclass(frozen=True)
class Union(TargetSet):
    parts: tuple

    @property
    def dim(self):
        return self.parts[0].dim

    @property
    def empty(self):
        return all(p.empty for p in self.parts)

    @property
    def diameter(self):
        pts = np.concatenate([p.atoms(max(p.diameter, 1e-3) / 4) for p in self.parts if not p.empty])
        return float(np.max(np.linalg.norm(pts[:, None] - pts[None], axis=-1)))

    def distance(self, z):
        return np.min([p.distance(z) for p in self.parts], axis=0)

    def cover(self, eps):
        return np.concatenate([p.cover(eps) for p in self.parts])

    def atoms(self, h):
        return np.concatenate([p.atoms(h) for p in self.parts if not p.empty])

    def base_scale(self, n_atoms):
        return min(p.base_scale(max(1, n_atoms // len(self.parts))) for p in self.parts)


def segment(a, b):
    """Interval [a, b] of the real line as a one-dimensional box."""
    return Box((a,), (b,))
