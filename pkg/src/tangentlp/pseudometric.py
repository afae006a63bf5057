"""Exponentially weighted path pseudo-distances d^a_eps and their certification.

For a basepoint ``a`` the pseudo-distance between x and y is the infimum over
paths from x to y of the integral of ``exp(-eps * d(a, .))`` along the path.
On the metric realisation of a unit-edge graph this infimum is attained by an
edge path, so it is a nonnegative-weight shortest-path problem whose edge
weights are the closed-form integrals of :func:`edge_cost`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .config import BOUND_RTOL, TRIANGLE_ATOL
from .exceptions import AdmissibilityError, InvalidEdgeError, MissingSliceError, TangentLpError
from .graph import MetricGraph
from .metric import DistanceField

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class PseudoParams:
    """Scale ``epsilon`` and length ``D`` with eps * (delta + D) <= log 2.

    ``delta`` is an upper bound for the hyperbolicity constant of the space
    the parameters will be used on.
    """

    epsilon: float
    D: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise AdmissibilityError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not self.D > 0:
            raise AdmissibilityError(f"D must be positive, got {self.D}")
        if self.delta < 0:
            raise AdmissibilityError(f"delta bound must be nonnegative, got {self.delta}")
        lhs = self.epsilon * (self.delta + self.D)
        if lhs > LOG2 * (1 + 1e-12):
            raise AdmissibilityError(
                f"epsilon*(delta+D) = {lhs:.6g} exceeds log 2 = {LOG2:.6g} "
                f"(epsilon={self.epsilon:g}, delta={self.delta:g}, D={self.D:g}); "
                f"need epsilon <= {LOG2 / (self.delta + self.D):.6g}"
            )

    @classmethod
    def default(cls, delta: float = 0.0, D: float = 1.0) -> "PseudoParams":
        return cls(LOG2 / (delta + D), D, delta)

    @property
    def alpha(self) -> float:
        return self.D * math.exp(-2.0 * self.D * self.epsilon)

    @property
    def beta(self) -> float:
        return 8.0 / self.epsilon

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "D": self.D,
            "delta_bound": self.delta,
            "alpha": self.alpha,
            "beta": self.beta,
        }


def edge_cost(du, dv, epsilon: float):
    """Integral of exp(-eps * d(a, .)) over a unit edge with endpoint distances du, dv.

    Along the edge the distance to ``a`` is ``min(du + t, dv + 1 - t)``; the
    kink sits at ``t* = (dv - du + 1) / 2``. Accepts scalars or arrays.
    """
    du = np.asarray(du, dtype=np.float64)
    dv = np.asarray(dv, dtype=np.float64)
    if np.any(np.abs(du - dv) > 1 + 1e-12):
        raise InvalidEdgeError("endpoint distances of a unit edge differ by more than 1")
    t = (dv - du + 1.0) / 2.0
    val = (
        -np.expm1(-epsilon * t) * np.exp(-epsilon * du)
        - np.expm1(-epsilon * (1.0 - t)) * np.exp(-epsilon * dv)
    ) / epsilon
    return float(val) if val.ndim == 0 else val


def edge_costs(g: MetricGraph, d: DistanceField, a: int, epsilon: float) -> np.ndarray:
    ra = d.row(a)
    return edge_cost(ra[g.edges[:, 0]], ra[g.edges[:, 1]], epsilon)


def phi(t, epsilon: float):
    """Integral of exp(-eps s) over [0, t]."""
    return -np.expm1(-epsilon * np.asarray(t, dtype=np.float64)) / epsilon


def tree_pseudo_distance(d: DistanceField, a: int, x, y, epsilon: float):
    """Closed form of d^a_eps on a tree: phi(d(a,x)) + phi(d(a,y)) - 2 phi((x|y)_a).

    Only valid when the graph is a tree; used as an independent oracle.
    """
    dax = d.matrix[a, x].astype(np.float64)
    day = d.matrix[a, y].astype(np.float64)
    dxy = d.matrix[x, y].astype(np.float64)
    gp = 0.5 * (dax + day - dxy)
    return phi(dax, epsilon) + phi(day, epsilon) - 2.0 * phi(gp, epsilon)


@dataclass(frozen=True, eq=False)
class PseudoField:
    """Rows d^a_eps(x, .) for the source vertices in ``sources``."""

    basepoint: int
    params: PseudoParams
    sources: np.ndarray
    table: np.ndarray

    def __post_init__(self):
        pos = {int(s): i for i, s in enumerate(self.sources)}
        object.__setattr__(self, "_pos", pos)

    def has(self, x: int) -> bool:
        return int(x) in self._pos

    def row(self, x: int) -> np.ndarray:
        try:
            return self.table[self._pos[int(x)]]
        except KeyError:
            raise MissingSliceError(
                f"pseudo-field at basepoint {self.basepoint} has no row for source {x}"
            ) from None

    def rows(self, xs) -> np.ndarray:
        return self.table[[self._pos[int(x)] for x in xs]]

    def __call__(self, x: int, y: int) -> float:
        return float(self.row(x)[y])


def pseudo_field(
    g: MetricGraph,
    d: DistanceField,
    a: int,
    params: PseudoParams,
    sources=None,
) -> PseudoField:
    """Single-source shortest paths under the edge costs of basepoint ``a``."""
    if sources is None:
        sources = np.arange(g.n)
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if g.m == 0:
        table = np.zeros((len(sources), g.n))
    else:
        W = g.weighted_adjacency(edge_costs(g, d, a, params.epsilon))
        table = dijkstra(W, directed=False, indices=sources)
    table = np.atleast_2d(table)
    table.setflags(write=False)
    return PseudoField(int(a), params, sources, table)


@dataclass(frozen=True)
class BoundReport:
    """Two-sided comparison of d^a_eps with exp(-eps (x|y)_a).

    Ratios are ``d_eps / upper`` (should stay <= 1) and ``d_eps / lower``
    (should stay >= 1, only on pairs with d(x, y) >= 2D).
    """

    basepoint: int
    pairs: int
    upper_violations: int
    worst_upper_ratio: float
    worst_upper_pair: tuple[int, int]
    lower_pairs: int
    lower_violations: int
    worst_lower_ratio: float | None
    worst_lower_pair: tuple[int, int] | None
    rtol: float

    @property
    def passed(self) -> bool:
        return self.upper_violations == 0 and self.lower_violations == 0

    def as_dict(self) -> dict:
        return {
            "basepoint": self.basepoint,
            "pairs": self.pairs,
            "upper_violations": self.upper_violations,
            "worst_upper_ratio": self.worst_upper_ratio,
            "worst_upper_pair": list(self.worst_upper_pair),
            "lower_pairs": self.lower_pairs,
            "lower_violations": self.lower_violations,
            "worst_lower_ratio": self.worst_lower_ratio,
            "worst_lower_pair": None if self.worst_lower_pair is None else list(self.worst_lower_pair),
            "rtol": self.rtol,
            "passed": self.passed,
        }


def bound_terms(field: PseudoField, d: DistanceField):
    """Per-source arrays (gromov, upper, lower, in_lower_scope) against all targets."""
    p = field.params
    a = field.basepoint
    ra = d.row(a)
    dx = d.rows(field.sources)
    gp = 0.5 * (ra[field.sources][:, None] + ra[None, :] - dx)
    envelope = np.exp(-p.epsilon * gp)
    return gp, p.beta * envelope, p.alpha * envelope, dx >= 2 * p.D


def verify_bounds(field: PseudoField, d: DistanceField, rtol: float = BOUND_RTOL) -> BoundReport:
    _, upper, lower, scope = bound_terms(field, d)
    val = field.table
    up_ratio = val / upper
    up_bad = val > upper * (1 + rtol)
    i = int(np.argmax(up_ratio))
    s, y = divmod(i, val.shape[1])
    worst_up = (int(field.sources[s]), int(y))

    lo_ratio = np.where(scope, val / lower, np.inf)
    lo_bad = scope & (val < lower * (1 - rtol))
    n_lower = int(scope.sum())
    if n_lower:
        j = int(np.argmin(lo_ratio))
        s2, y2 = divmod(j, val.shape[1])
        worst_lo = float(lo_ratio.flat[j])
        worst_lo_pair = (int(field.sources[s2]), int(y2))
    else:
        worst_lo, worst_lo_pair = None, None
    return BoundReport(
        field.basepoint,
        int(val.size),
        int(up_bad.sum()),
        float(up_ratio.flat[i]),
        worst_up,
        n_lower,
        int(lo_bad.sum()),
        worst_lo,
        worst_lo_pair,
        rtol,
    )


@dataclass(frozen=True)
class PathOracleReport:
    """Random non-simple edge paths never beat the computed pseudo-distance."""

    paths: int
    worst_deficit: float
    worst_path_len: int
    atol: float

    @property
    def passed(self) -> bool:
        return self.worst_deficit <= self.atol

    def as_dict(self) -> dict:
        return {
            "paths": self.paths,
            "worst_deficit": self.worst_deficit,
            "worst_path_len": self.worst_path_len,
            "atol": self.atol,
            "passed": self.passed,
        }


def random_path_oracle(
    g: MetricGraph,
    d: DistanceField,
    field: PseudoField,
    n_paths: int = 1000,
    seed=0,
    max_detour: int = 12,
    atol: float = TRIANGLE_ATOL,
) -> PathOracleReport:
    """Cost random walks-then-geodesics between random pairs and compare.

    Each path starts at a random source x, wanders ``0..max_detour`` random
    steps (vertices may repeat), then follows a random geodesic to a random
    target y. Its cost must be at least ``d^a_eps(x, y)``.
    """
    rng = np.random.default_rng(seed)
    eps = field.params.epsilon
    ra = d.row(field.basepoint)
    worst, worst_len = -math.inf, 0
    for _ in range(n_paths):
        x = int(field.sources[rng.integers(len(field.sources))])
        y = int(rng.integers(g.n))
        path = [x]
        for _ in range(int(rng.integers(0, max_detour + 1))):
            nb = g.neighbors(path[-1])
            if len(nb) == 0:
                break
            path.append(int(nb[rng.integers(len(nb))]))
        dy = d.row(y)
        while path[-1] != y:
            nb = g.neighbors(path[-1])
            closer = nb[dy[nb] == dy[path[-1]] - 1]
            path.append(int(closer[rng.integers(len(closer))]))
        p = np.asarray(path)
        cost = float(np.sum(edge_cost(ra[p[:-1]], ra[p[1:]], eps))) if len(p) > 1 else 0.0
        deficit = field(x, y) - cost
        if deficit > worst:
            worst, worst_len = deficit, len(p) - 1
    return PathOracleReport(n_paths, float(worst), worst_len, atol)


def check_pseudometric_axioms(field: PseudoField, atol: float = TRIANGLE_ATOL, max_via: int = 256, seed=0) -> dict:
    """Symmetry, zero diagonal and triangle inequality on the square part of a field.

    Sums along Dijkstra paths depend on summation order, so symmetry is checked
    to ``atol`` as well. When there are more than ``max_via`` sources, the
    intermediate point of the triangle check runs over a seeded sample of them.
    """
    src = field.sources
    T = field.table[:, src]
    sym = float(np.max(np.abs(T - T.T))) if len(src) else 0.0
    diag = float(np.max(np.abs(np.diag(T)))) if len(src) else 0.0
    via_idx = np.arange(len(src))
    if len(src) > max_via:
        via_idx = np.sort(np.random.default_rng(seed).choice(len(src), max_via, replace=False))
    # d(x, z) <= d(x, y) + d(y, z) for every source x, sampled source y, any z
    excess = 0.0
    for j in via_idx:
        via = T[:, j][:, None] + field.table[j][None, :]
        excess = max(excess, float(np.max(field.table - via)))
    return {
        "max_asymmetry": sym,
        "max_diagonal": diag,
        "max_triangle_excess": excess,
        "via_points": int(len(via_idx)),
        "passed": sym <= atol and diag == 0.0 and excess <= atol,
    }


def check_sources(g: MetricGraph, sources) -> np.ndarray:
    out = np.asarray([g.vertex(s) for s in sources], dtype=np.int64)
    if len(out) == 0:
        raise TangentLpError("at least one source vertex is required")
    return out
