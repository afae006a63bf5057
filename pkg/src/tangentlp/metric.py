"""Distances, Gromov products, hyperbolicity, growth and measure constants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .config import DEFAULT_DELTA_CAP
from .exceptions import DisconnectedGraphError, HyperbolicityCapError, TangentLpError
from .graph import MetricGraph


@dataclass(frozen=True, eq=False)
class DistanceField:
    """All-pairs graph distances in edge units.

    ``matrix`` uses the narrowest unsigned dtype that holds the diameter; rows
    returned by :meth:`row` are widened to ``int64`` so callers can do
    arithmetic without overflow.
    """

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x: int, y: int) -> int:
        return int(self.matrix[x, y])

    def row(self, x: int) -> np.ndarray:
        return self.matrix[x].astype(np.int64)

    def rows(self, xs) -> np.ndarray:
        return self.matrix[np.asarray(xs)].astype(np.int64)

    @cached_property
    def eccentricity(self) -> np.ndarray:
        return self.matrix.max(axis=1).astype(np.int64)

    @cached_property
    def diameter(self) -> int:
        return int(self.eccentricity.max())

    def ball(self, x: int, r: float) -> np.ndarray:
        return np.flatnonzero(self.matrix[x] <= math.floor(r + 1e-12))


def _narrow_dtype(diameter: int):
    if diameter < 2**8:
        return np.uint8
    if diameter < 2**16:
        return np.uint16
    return np.uint32


def all_pairs_distances(g: MetricGraph, chunk: int = 512) -> DistanceField:
    """Breadth-first distances from every source, computed in source chunks."""
    n = g.n
    blocks = []
    for lo in range(0, n, chunk):
        idx = np.arange(lo, min(n, lo + chunk))
        block = shortest_path(g.adjacency, method="D", unweighted=True, directed=False, indices=idx)
        if not np.all(np.isfinite(block)):
            row, col = np.argwhere(~np.isfinite(block))[0]
            reach = np.isfinite(block[row])
            bad = np.flatnonzero(~reach)
            raise DisconnectedGraphError([g.labels[i] for i in bad], 2)
        blocks.append(block.astype(np.int64))
    full = np.concatenate(blocks, axis=0)
    dtype = _narrow_dtype(int(full.max()) if full.size else 0)
    mat = full.astype(dtype)
    mat.setflags(write=False)
    return DistanceField(mat)


def gromov_product(d: DistanceField, x: int, y: int, a: int) -> float:
    """(x|y)_a = (d(x,a) + d(y,a) - d(x,y)) / 2."""
    return 0.5 * (d(x, a) + d(y, a) - d(x, y))


def doubled_gromov_matrix(d: DistanceField, a: int, dtype=np.int64) -> np.ndarray:
    """Integer matrix 2(x|y)_a over all x, y."""
    ra = d.row(a)
    return (ra[:, None] + ra[None, :] - d.matrix.astype(np.int64)).astype(dtype)


@dataclass(frozen=True)
class DeltaEstimate:
    """Result of a four-point hyperbolicity scan.

    ``value`` is exact in ``exact`` mode and a lower bound otherwise;
    ``witness`` is a quadruple ``(a, x, y, z)`` attaining it (``None`` when
    the value is 0 by default).
    """

    value: float
    mode: str
    is_lower_bound: bool
    witness: tuple[int, int, int, int] | None
    quadruples: int


def _delta_at(G2: np.ndarray, block: int = 32):
    """max over x,y,z of min(G2[x,z], G2[y,z]) - G2[x,y], with an argmax."""
    n = G2.shape[0]
    best, arg = -1, None
    for lo in range(0, n, block):
        xs = slice(lo, min(n, lo + block))
        M = np.minimum(G2[xs, None, :], G2[None, :, :]).max(axis=2)
        gap = M - G2[xs]
        i = int(np.argmax(gap))
        val = int(gap.flat[i])
        if val > best:
            x, y = divmod(i, n)
            x += lo
            z = int(np.argmax(np.minimum(G2[x], G2[y])))
            best, arg = val, (x, y, z)
    return best, arg


def hyperbolicity_delta(
    d: DistanceField,
    mode: str = "exact",
    *,
    basepoint: int = 0,
    n_samples: int = 100_000,
    seed=None,
    cap: int = DEFAULT_DELTA_CAP,
) -> DeltaEstimate:
    """Gromov hyperbolicity constant via the four-point condition.

    ``exact`` scans every quadruple (vertex count must not exceed ``cap``);
    ``fixed_basepoint`` fixes ``a = basepoint``; ``sampled`` draws
    ``n_samples`` random quadruples from ``seed``. Both non-exact modes return
    lower bounds of the exact value. Values are clamped below at 0.
    """
    n = d.n
    if mode == "exact":
        if n > cap:
            raise HyperbolicityCapError(n, cap)
        basepoints = range(n)
    elif mode == "fixed_basepoint":
        basepoints = [basepoint]
    elif mode == "sampled":
        if seed is None:
            raise TangentLpError("sampled hyperbolicity needs an explicit seed")
        return _sampled_delta(d, n_samples, seed)
    else:
        raise TangentLpError(f"unknown hyperbolicity mode {mode!r}")

    dtype = np.int16 if d.diameter < 2**13 else np.int64
    best, witness = 0, None
    for a in basepoints:
        G2 = doubled_gromov_matrix(d, a, dtype)
        val, arg = _delta_at(G2)
        if val > best:
            best, witness = val, (a, *arg)
    return DeltaEstimate(best / 2.0, mode, mode != "exact", witness, len(basepoints) * n**3)


def _sampled_delta(d: DistanceField, n_samples: int, seed) -> DeltaEstimate:
    rng = np.random.default_rng(seed)
    n = d.n
    M = d.matrix
    best, witness = 0, None
    done = 0
    while done < n_samples:
        size = min(65536, n_samples - done)
        q = rng.integers(0, n, size=(size, 4))
        a, x, y, z = q.T
        dxa = M[x, a].astype(np.int64)
        dya = M[y, a].astype(np.int64)
        dza = M[z, a].astype(np.int64)
        xy = dxa + dya - M[x, y]
        xz = dxa + dza - M[x, z]
        yz = dya + dza - M[y, z]
        gap = np.minimum(xz, yz) - xy
        i = int(np.argmax(gap))
        if gap[i] > best:
            best, witness = int(gap[i]), tuple(int(t) for t in q[i])
        done += size
    return DeltaEstimate(best / 2.0, "sampled", True, witness, n_samples)


@dataclass(frozen=True)
class GrowthProfile:
    """Cumulative ball measure f(r) = mu(B(o, r)) for r = 0..diameter.

    ``h_prime`` is the largest ratio f(n+1)/f(n) over the table and
    ``entropy`` the least-squares slope of log f over ``window``.
    """

    basepoint: int
    f: np.ndarray
    h_prime: float
    entropy: float
    window: tuple[int, int]
    degenerate: bool

    def at(self, r) -> float:
        """f at a (possibly fractional) radius; constant past the table."""
        i = int(math.floor(float(r) + 1e-12))
        if i < 0:
            return 0.0
        return float(self.f[min(i, len(self.f) - 1)])

    def at_many(self, r: np.ndarray) -> np.ndarray:
        r = np.minimum(np.asarray(r, dtype=np.int64), len(self.f) - 1)
        return self.f[r]

    @property
    def total(self) -> float:
        return float(self.f[-1])


def bfs_distances(g: MetricGraph, o: int) -> np.ndarray:
    """Distances from a single source."""
    row = shortest_path(g.adjacency, method="D", unweighted=True, directed=False, indices=o)
    return row.astype(np.int64)


def growth_profile(
    g: MetricGraph,
    o: int,
    d: DistanceField | None = None,
    r_min: int = 1,
    r_max: int | None = None,
) -> GrowthProfile:
    """Ball measures around ``o``; only one breadth-first search is needed when ``d`` is omitted."""
    dist = d.row(o) if d is not None else bfs_distances(g, o)
    shells = np.bincount(dist, weights=g.weight, minlength=int(dist.max()) + 1)
    f = np.cumsum(shells)
    ratios = f[1:] / f[:-1]
    h_prime = float(max(1.0, ratios.max())) if len(ratios) else 1.0
    if r_max is None:
        r_max = int(dist.max()) - 1
    r_max = min(r_max, len(f) - 1)
    degenerate = r_max - r_min + 1 < 2
    if degenerate:
        entropy = 0.0
    else:
        r = np.arange(r_min, r_max + 1, dtype=np.float64)
        y = np.log(f[r_min : r_max + 1])
        rc = r - r.mean()
        entropy = float((rc @ (y - y.mean())) / (rc @ rc))
    f.setflags(write=False)
    return GrowthProfile(int(o), f, h_prime, entropy, (int(r_min), int(r_max)), degenerate)


@dataclass(frozen=True)
class NonCollapsingCertificate:
    """mu(B(x, C)) >= v for every vertex x, with v attained at ``argmin``."""

    C: float
    v: float
    argmin: int


def ball_masses(g: MetricGraph, r: int) -> np.ndarray:
    """mu(B(x, r)) for every x, by r rounds of sparse reachability."""
    from scipy.sparse import identity

    step = (g.adjacency + identity(g.n, format="csr")).astype(bool)
    reach = identity(g.n, format="csr", dtype=bool)
    for _ in range(r):
        reach = (reach @ step).astype(bool)
    return reach @ g.weight


def non_collapsing(g: MetricGraph, C: float, d: DistanceField | None = None) -> NonCollapsingCertificate:
    if C < 0:
        raise TangentLpError("non-collapsing radius must be nonnegative")
    r = math.floor(C + 1e-12)
    if d is None:
        masses = ball_masses(g, r)
    else:
        masses = np.empty(g.n)
        for lo in range(0, g.n, 1024):
            block = d.matrix[lo : lo + 1024] <= r
            masses[lo : lo + 1024] = block @ g.weight
    i = int(np.argmin(masses))
    return NonCollapsingCertificate(float(C), float(masses[i]), i)


def p_threshold(h: float, delta: float) -> float:
    """Exponent threshold max(1, h * delta / log 2)."""
    if h < 0 or delta < 0:
        raise TangentLpError("entropy and delta must be nonnegative")
    return max(1.0, h * delta / math.log(2.0))
