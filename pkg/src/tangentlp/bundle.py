"""Discrete tangent bundle with L^p fibers and its curvature and properness checks.

The vector attached to (a, x) is the function on vertices

    ax(xi) = d^a_eps(x, xi) * exp(-d(a, xi)) / f(d(a, xi))**(1/p)

where f is the growth profile anchored at a fixed basepoint o. Fiber norms
are weighted by the vertex measure. All certifications difference the raw
vectors, so they do not depend on whether vectors are recentered.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .config import BOUND_RTOL
from .exceptions import BasepointMismatchError, NotATreeError, TangentLpError
from .graph import MetricGraph
from .metric import DistanceField, GrowthProfile, non_collapsing
from .pseudometric import PseudoField, PseudoParams, pseudo_field
from .symmetry import Orbits, vertex_orbits
from ._parallel import parallel_map


@dataclass(frozen=True, eq=False)
class BundleParams:
    pseudo: PseudoParams
    p: float
    o: int
    profile: GrowthProfile

    def __post_init__(self):
        if not (self.p > 1 and math.isfinite(self.p)):
            raise TangentLpError(f"fiber exponent p must be a finite real > 1, got {self.p}")

    @property
    def epsilon(self) -> float:
        return self.pseudo.epsilon

    @property
    def E(self) -> float:
        return (self.profile.h_prime - 1.0) / -math.expm1(-self.p)

    @property
    def kappa(self) -> float:
        return -self.pseudo.epsilon

    def D_C(self, C: float) -> float:
        return self.E ** (1.0 / self.p) * self.pseudo.beta * math.exp(self.epsilon * C)

    @property
    def norm_bound(self) -> float:
        return self.pseudo.beta * self.E ** (1.0 / self.p)

    def coordinate_weight(self, dist: np.ndarray) -> np.ndarray:
        """exp(-n) / f(n)**(1/p) evaluated at integer distances n."""
        dist = np.asarray(dist, dtype=np.int64)
        return np.exp(-dist.astype(np.float64)) / self.profile.at_many(dist) ** (1.0 / self.p)

    def as_dict(self) -> dict:
        return {
            **self.pseudo.as_dict(),
            "p": self.p,
            "o": self.o,
            "h_prime": self.profile.h_prime,
            "E": self.E,
            "kappa": self.kappa,
            "norm_bound": self.norm_bound,
        }


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A fiber element over ``basepoint``: one coordinate per vertex."""

    basepoint: int
    values: np.ndarray
    weight: np.ndarray
    p: float

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** self.p * self.weight) ** (1.0 / self.p))

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        if other.basepoint != self.basepoint:
            raise BasepointMismatchError(
                f"vectors live over different basepoints {self.basepoint} and {other.basepoint}"
            )
        return TangentVector(self.basepoint, self.values - other.values, self.weight, self.p)


def lp_norms(diff: np.ndarray, weight: np.ndarray, p: float) -> np.ndarray:
    """Row-wise weighted p-norms."""
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij,j->i", diff, diff, weight))
    return (np.abs(diff) ** p @ weight) ** (1.0 / p)


def lp_powers(diff: np.ndarray, weight: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return np.einsum("ij,ij,j->i", diff, diff, weight)
    return np.abs(diff) ** p @ weight


class GraphBundle:
    """Tangent vectors of a finite graph, with a small cache of pseudo-fields.

    ``vectors(a)`` is the matrix whose row x is ax, over all vertices x.
    """

    def __init__(self, g: MetricGraph, d: DistanceField, params: BundleParams, cache_size: int = 4, recentered: bool = False):
        self.g = g
        self.d = d
        self.params = params
        self.recentered = recentered
        self._cache: OrderedDict[int, PseudoField] = OrderedDict()
        self._cache_size = cache_size

    def field(self, a: int) -> PseudoField:
        a = int(a)
        if a in self._cache:
            self._cache.move_to_end(a)
            return self._cache[a]
        fld = pseudo_field(self.g, self.d, a, self.params.pseudo)
        self._cache[a] = fld
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return fld

    def coordinate_weight(self, a: int) -> np.ndarray:
        return self.params.coordinate_weight(self.d.row(a))

    def raw_vectors(self, a: int, sources=None) -> np.ndarray:
        """Rows ax without recentering; every certification differences these."""
        w = self.coordinate_weight(a)
        if sources is None:
            return self.field(a).table * w
        fld = pseudo_field(self.g, self.d, a, self.params.pseudo, sources)
        return fld.table * w

    def vectors(self, a: int, sources=None) -> np.ndarray:
        V = self.raw_vectors(a, sources)
        if self.recentered:
            V = V - self.field(a).row(a) * self.coordinate_weight(a)
        return V

    def tangent_vector(self, a: int, x: int) -> TangentVector:
        v = tangent_vector(a, x, self.params, self.field(a), self.d, self.g.weight)
        if self.recentered:
            v = recenter(v, tangent_vector(a, a, self.params, self.field(a), self.d, self.g.weight))
        return v

    def diff_norm(self, a: int, x: int, y: int) -> float:
        fld = self.field(a)
        w = self.coordinate_weight(a)
        diff = (fld.row(x) - fld.row(y)) * w
        return float(lp_norms(diff[None, :], self.g.weight, self.params.p)[0])


def tangent_vector(
    a: int,
    x: int,
    params: BundleParams,
    field: PseudoField,
    d: DistanceField,
    weight: np.ndarray,
) -> TangentVector:
    if field.basepoint != a:
        raise BasepointMismatchError(f"pseudo-field has basepoint {field.basepoint}, expected {a}")
    values = field.row(x) * params.coordinate_weight(d.row(a))
    return TangentVector(int(a), values, weight, params.p)


def recenter(ax: TangentVector, aa: TangentVector) -> TangentVector:
    """ax - aa, so the vector of (a, a) becomes zero."""
    return ax - aa


# -- certification ---------------------------------------------------------


@dataclass(frozen=True)
class NormBoundReport:
    vectors: int
    bound: float
    max_norm: float
    argmax: tuple[int, int]
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "vectors": self.vectors,
            "bound": self.bound,
            "max_norm": self.max_norm,
            "argmax": list(self.argmax),
            "violations": self.violations,
            "passed": self.passed,
        }


def verify_norm_bound(bundle: GraphBundle, orbits: Orbits | None = None, rtol: float = BOUND_RTOL) -> NormBoundReport:
    """Check ||ax||_p <= beta E^(1/p) for every (a, x), one a per orbit."""
    g, prm = bundle.g, bundle.params
    orbits = orbits if orbits is not None else vertex_orbits(g)
    bound = prm.norm_bound
    best, arg, bad, total = -1.0, (0, 0), 0, 0
    for a, size in zip(orbits.representatives, orbits.sizes):
        norms = lp_norms(bundle.raw_vectors(a), g.weight, prm.p)
        i = int(np.argmax(norms))
        if norms[i] > best:
            best, arg = float(norms[i]), (int(a), i)
        bad += int(size) * int(np.sum(norms > bound * (1 + rtol)))
        total += int(size) * g.n
    return NormBoundReport(total, bound, best, arg, bad)


def close_pairs(d: DistanceField, C: float) -> tuple[np.ndarray, np.ndarray]:
    """Unordered pairs x < y with d(x, y) <= C."""
    x, y = np.nonzero(np.triu(d.matrix <= math.floor(C + 1e-12), k=1))
    return x, y


@dataclass
class _CurvatureAccumulator:
    triples: int = 0
    zero: int = 0
    violations: int = 0
    worst_ratio: float = -1.0
    worst_triple: tuple = (0, 0, 0)
    lip_violations: int = 0
    lip_worst: float = 0.0
    gromov_violations: int = 0
    # weighted sums for the slope fit of log diff against d(a, x)
    sw: float = 0.0
    sx: float = 0.0
    sy: float = 0.0
    sxx: float = 0.0
    sxy: float = 0.0
    decay: dict = field(default_factory=dict)

    def merge(self, other: "_CurvatureAccumulator"):
        self.triples += other.triples
        self.zero += other.zero
        self.violations += other.violations
        if other.worst_ratio > self.worst_ratio:
            self.worst_ratio, self.worst_triple = other.worst_ratio, other.worst_triple
        self.lip_violations += other.lip_violations
        self.lip_worst = max(self.lip_worst, other.lip_worst)
        self.gromov_violations += other.gromov_violations
        for k in ("sw", "sx", "sy", "sxx", "sxy"):
            setattr(self, k, getattr(self, k) + getattr(other, k))
        for r, (w, s, m) in other.decay.items():
            w0, s0, m0 = self.decay.get(r, (0.0, 0.0, 0.0))
            self.decay[r] = (w0 + w, s0 + s, max(m0, m))


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature certificate ||ax - ay|| <= D_C exp(-eps d(a, x)) for d(x, y) <= C.

    ``triples`` counts ordered triples (a, x, y) with x != y. ``slope`` is the
    least-squares slope of log ||ax - ay|| against d(a, x) over triples with
    nonzero difference; the construction predicts at most ``-eps``.
    ``decay`` lists, per distance r = d(a, x), the count, mean and max of
    ||ax - ay||.
    """

    mode: str
    C: float
    D_C: float
    kappa: float
    triples: int
    zero_differences: int
    violations: int
    worst_ratio: float
    worst_triple: tuple[int, int, int]
    lipschitz_violations: int
    lipschitz_worst_ratio: float
    gromov_violations: int
    slope: float | None
    slope_bound: float
    basepoints_evaluated: int
    orbit_method: str
    decay: tuple

    @property
    def slope_ok(self) -> bool:
        return self.slope is not None and self.slope <= self.slope_bound

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.lipschitz_violations == 0 and self.gromov_violations == 0

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "C": self.C,
            "D_C": self.D_C,
            "kappa": self.kappa,
            "triples": self.triples,
            "zero_differences": self.zero_differences,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
            "worst_triple": list(self.worst_triple),
            "lipschitz_violations": self.lipschitz_violations,
            "lipschitz_worst_ratio": self.lipschitz_worst_ratio,
            "gromov_violations": self.gromov_violations,
            "slope": self.slope,
            "slope_bound": self.slope_bound,
            "slope_ok": self.slope_ok,
            "basepoints_evaluated": self.basepoints_evaluated,
            "orbit_method": self.orbit_method,
            "passed": self.passed,
        }


def rounding_floor(table: np.ndarray, w: np.ndarray, weight: np.ndarray, p: float) -> float:
    """Absolute resolution of a difference of two rows of ``table * w``.

    Shortest-path sums carry rounding errors of a few ulps of the largest
    entry; differences of pseudo-distances below this scale are noise.
    """
    ulp = 64 * np.finfo(np.float64).eps * float(np.max(table, initial=0.0))
    return ulp * float(np.sum(np.abs(w) ** p * weight) ** (1.0 / p))


def _curvature_at(bundle: GraphBundle, a: int, xs, ys, mult: float, both: bool, C: float, rtol: float, chunk: int = 4096):
    prm = bundle.params
    g, d = bundle.g, bundle.d
    eps, p = prm.epsilon, prm.p
    D_C = prm.D_C(C)
    E_root = prm.E ** (1.0 / p)
    beta = prm.pseudo.beta
    fld = bundle.field(a)
    w = bundle.coordinate_weight(a)
    ra = d.row(a)
    floor = rounding_floor(fld.table, w, g.weight, p)
    acc = _CurvatureAccumulator()
    for lo in range(0, len(xs), chunk):
        x = xs[lo : lo + chunk]
        y = ys[lo : lo + chunk]
        diff = (fld.table[x] - fld.table[y]) * w
        nrm = lp_norms(diff, g.weight, p)
        dax, day = ra[x], ra[y]
        # the ordered triple (a, x, y) and, for unordered pairs, its mirror (a, y, x)
        orders = ((dax, (x, y)), (day, (y, x))) if both else ((dax, (x, y)),)
        k = len(orders)
        for da, (u, v) in orders:
            bound = D_C * np.exp(-eps * da)
            ratio = nrm / bound
            acc.violations += int(mult * np.sum(nrm > bound * (1 + rtol)))
            i = int(np.argmax(ratio))
            if ratio[i] > acc.worst_ratio:
                acc.worst_ratio = float(ratio[i])
                acc.worst_triple = (int(a), int(u[i]), int(v[i]))
            nz = nrm > 0
            if np.any(nz):
                lx = da[nz].astype(np.float64)
                ly = np.log(nrm[nz])
                acc.sw += mult * len(lx)
                acc.sx += mult * lx.sum()
                acc.sy += mult * ly.sum()
                acc.sxx += mult * (lx * lx).sum()
                acc.sxy += mult * (lx * ly).sum()
            for r in np.unique(da):
                sel = da == r
                acc_w, acc_s, acc_m = acc.decay.get(int(r), (0.0, 0.0, 0.0))
                acc.decay[int(r)] = (
                    acc_w + mult * int(sel.sum()),
                    acc_s + mult * float(nrm[sel].sum()),
                    max(acc_m, float(nrm[sel].max())),
                )
        acc.triples += int(k * mult * len(x))
        acc.zero += int(k * mult * np.sum(nrm == 0))
        # Lipschitz transfer and the Gromov-product form of the bound (symmetric in x, y)
        dxy = fld.table[x, y]
        lip = E_root * dxy
        acc.lip_violations += int(k * mult * np.sum(nrm > lip * (1 + rtol) + floor))
        resolved = lip > floor
        r_lip = nrm[resolved] / lip[resolved]
        acc.lip_worst = max(acc.lip_worst, float(r_lip.max(initial=0.0)))
        gp = 0.5 * (dax + day - d.matrix[x, y].astype(np.int64))
        gbound = E_root * beta * np.exp(-eps * gp)
        acc.gromov_violations += int(k * mult * np.sum(nrm > gbound * (1 + rtol)))
    return acc


def verify_curvature(
    bundle: GraphBundle,
    C: float,
    mode: str = "exhaustive",
    *,
    n_samples: int = 20000,
    seed=None,
    orbits: Orbits | None = None,
    n_jobs: int = 1,
    rtol: float = BOUND_RTOL,
) -> CurvatureReport:
    """Check the curvature inequality over triples (a, x, y) with d(x, y) <= C.

    ``exhaustive`` visits every basepoint orbit and every close pair;
    ``sampled`` draws ``n_samples`` triples from ``seed``.
    """
    if C < 0:
        raise TangentLpError("curvature slack C must be nonnegative")
    g, d, prm = bundle.g, bundle.d, bundle.params
    if mode == "exhaustive":
        orbits = orbits if orbits is not None else vertex_orbits(g)
        xs, ys = close_pairs(d, C)
        jobs = [(int(a), xs, ys, int(s), True) for a, s in zip(orbits.representatives, orbits.sizes)]
        method = orbits.method
    elif mode == "sampled":
        if seed is None:
            raise TangentLpError("sampled curvature check needs an explicit seed")
        rng = np.random.default_rng(seed)
        a_s = rng.integers(0, g.n, n_samples)
        x_s = rng.integers(0, g.n, n_samples)
        y_s = np.empty(n_samples, dtype=np.int64)
        for i, x in enumerate(x_s):
            ball = d.ball(int(x), C)
            y_s[i] = ball[rng.integers(len(ball))]
        keep = x_s != y_s
        a_s, x_s, y_s = a_s[keep], x_s[keep], y_s[keep]
        order = np.lexsort((y_s, x_s, a_s))
        a_s, x_s, y_s = a_s[order], x_s[order], y_s[order]
        jobs = []
        for a in np.unique(a_s):
            sel = a_s == a
            jobs.append((int(a), x_s[sel], y_s[sel], 1, False))
        method = "sampled"
    else:
        raise TangentLpError(f"unknown curvature mode {mode!r}")

    parts = parallel_map(lambda j: _curvature_at(bundle, *j, C, rtol), jobs, n_jobs)
    acc = _CurvatureAccumulator()
    for part in parts:
        acc.merge(part)
    if acc.sw > 0 and acc.sxx * acc.sw - acc.sx**2 > 0:
        slope = (acc.sw * acc.sxy - acc.sx * acc.sy) / (acc.sw * acc.sxx - acc.sx**2)
    else:
        slope = None
    decay = tuple(
        (r, int(w), s / w if w else 0.0, m) for r, (w, s, m) in sorted(acc.decay.items())
    )
    return CurvatureReport(
        mode,
        float(C),
        prm.D_C(C),
        prm.kappa,
        int(acc.triples),
        int(acc.zero),
        int(acc.violations),
        float(acc.worst_ratio),
        acc.worst_triple,
        int(acc.lip_violations),
        float(acc.lip_worst),
        int(acc.gromov_violations),
        None if slope is None else float(slope),
        prm.kappa + 0.1,
        len(jobs),
        method,
        decay,
    )


# -- properness ------------------------------------------------------------


def default_slack(pseudo: PseudoParams) -> int:
    """Smallest integer C with alpha - beta exp(-eps C) > 0."""
    C = math.floor(math.log(pseudo.beta / pseudo.alpha) / pseudo.epsilon) + 1
    while pseudo.alpha - pseudo.beta * math.exp(-pseudo.epsilon * C) <= 0:
        C += 1
    while C > 0 and pseudo.alpha - pseudo.beta * math.exp(-pseudo.epsilon * (C - 1)) > 0:
        C -= 1
    return int(max(C, 0))


@dataclass(frozen=True)
class PropernessConstants:
    C: float
    C_prime: float
    K: float
    K_prime: float
    v: float

    @property
    def threshold(self) -> float:
        """Smallest d(x, y) in the properness regime, 4C' + 2C."""
        return 4 * self.C_prime + 2 * self.C

    def witness_floor(self, dxy) -> np.ndarray:
        """(v / C) (d(x, y) - 2C' - 2C), the guaranteed measure of A(x, y)."""
        return self.v / self.C * (np.asarray(dxy, dtype=np.float64) - 2 * self.C_prime - 2 * self.C)

    def lower_bound(self, dxy) -> np.ndarray:
        return self.K_prime * self.witness_floor(dxy)

    @classmethod
    def compute(cls, params: BundleParams, v: float, C: float | None = None, f=None) -> "PropernessConstants":
        """Constants for slack ``C``; ``f`` overrides the profile lookup f(r)."""
        ps = params.pseudo
        C = float(default_slack(ps) if C is None else C)
        if C <= 0 or ps.alpha - ps.beta * math.exp(-ps.epsilon * C) <= 0:
            raise TangentLpError(
                f"properness slack C={C:g} must satisfy alpha - beta exp(-eps C) > 0 "
                f"(smallest integer choice is {default_slack(ps)})"
            )
        eps, D, p = ps.epsilon, ps.D, params.p
        Cp = 2 * D + 2.5 * C
        K = ps.alpha * math.exp(-eps * C) - ps.beta * math.exp(-eps * (2 * D + 2 * C))
        fr = f(Cp + C) if f is not None else params.profile.at(Cp + C)
        Kp = v * K**p * math.exp(-p * (Cp + C)) / fr
        return cls(C, Cp, K, Kp, float(v))

    @classmethod
    def from_bundle(cls, bundle: GraphBundle, C: float | None = None) -> "PropernessConstants":
        ps = bundle.params.pseudo
        C_val = float(default_slack(ps) if C is None else C)
        v = non_collapsing(bundle.g, C_val / 2.0, bundle.d).v
        return cls.compute(bundle.params, v, C_val)

    def as_dict(self) -> dict:
        return {
            "C": self.C,
            "C_prime": self.C_prime,
            "K": self.K,
            "K_prime": self.K_prime,
            "v": self.v,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class WitnessSet:
    pair: tuple[int, int]
    members: np.ndarray
    measure: float


def witness_set(x: int, y: int, consts: PropernessConstants, d: DistanceField, weight=None) -> WitnessSet:
    """Vertices a with d(x,a) + d(a,y) <= d(x,y) + C and d(a,x), d(a,y) >= C'."""
    rx, ry = d.row(x), d.row(y)
    dxy = rx[y]
    mask = (rx + ry <= dxy + consts.C) & (rx >= consts.C_prime) & (ry >= consts.C_prime)
    members = np.flatnonzero(mask)
    w = np.ones(d.n) if weight is None else np.asarray(weight)
    return WitnessSet((int(x), int(y)), members, float(w[members].sum()))


@dataclass(frozen=True)
class PropernessReport:
    """Integrated difference S(x, y) against the linear lower bound.

    ``rows`` holds (x, y, d(x, y), S, lower_bound, witness_measure, status)
    for every requested pair; status is ``ok``, ``violation`` or ``skipped``.
    """

    constants: PropernessConstants
    rows: tuple
    in_scope: int
    violations: int
    worst_ratio: float | None
    slope: float | None
    skipped_reason: str | None
    required_diameter: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "constants": self.constants.as_dict(),
            "pairs": len(self.rows),
            "in_scope": self.in_scope,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
            "slope": self.slope,
            "skipped_reason": self.skipped_reason,
            "required_diameter": self.required_diameter,
            "passed": self.passed,
        }


def default_pairs(d: DistanceField, limit: int = 4000, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """All unordered pairs when few enough, else a seeded sample plus one far pair, sorted."""
    n = d.n
    total = n * (n - 1) // 2
    if total <= limit:
        x, y = np.triu_indices(n, k=1)
        return x, y
    rng = np.random.default_rng(seed)
    x = rng.integers(0, n, 2 * limit)
    y = rng.integers(0, n, 2 * limit)
    pairs = np.unique(np.stack([np.minimum(x, y), np.maximum(x, y)], axis=1), axis=0)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]][: limit - 1]
    # always include a far-apart pair (double sweep; exact diameter on trees)
    u = int(np.argmax(d.row(0)))
    v = int(np.argmax(d.row(u)))
    far = np.array([[min(u, v), max(u, v)]])
    pairs = np.unique(np.concatenate([pairs, far]), axis=0)
    return pairs[:, 0], pairs[:, 1]


def integrated_differences(bundle: GraphBundle, xs, ys, n_jobs: int = 1, orbits=None) -> np.ndarray:
    """S(x, y) = sum_a ||ax - ay||_p^p mu(a) for each pair."""
    g, prm = bundle.g, bundle.params
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    sources = np.unique(np.concatenate([xs, ys]))
    pos = np.searchsorted(sources, xs), np.searchsorted(sources, ys)

    def at(a):
        V = bundle.raw_vectors(a, sources)
        out = np.empty(len(xs))
        for lo in range(0, len(xs), 2048):
            sl = slice(lo, lo + 2048)
            out[sl] = lp_powers(V[pos[0][sl]] - V[pos[1][sl]], g.weight, prm.p)
        return out * g.weight[a]

    parts = parallel_map(at, range(g.n), n_jobs)
    return np.sum(parts, axis=0) if parts else np.zeros(len(xs))


def verify_properness(
    bundle: GraphBundle,
    consts: PropernessConstants,
    pairs=None,
    n_jobs: int = 1,
    rtol: float = BOUND_RTOL,
) -> PropernessReport:
    d = bundle.d
    xs, ys = pairs if pairs is not None else default_pairs(d)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    dxy = d.matrix[xs, ys].astype(np.int64)
    scope = dxy >= consts.threshold - 1e-12
    rows = []
    if not np.any(scope):
        for x, y, r in zip(xs, ys, dxy):
            rows.append((int(x), int(y), int(r), None, None, None, "skipped"))
        reason = (
            f"graph too small for properness regime: need d(x, y) >= {consts.threshold:g}, "
            f"largest requested distance is {int(dxy.max()) if len(dxy) else 0}"
        )
        return PropernessReport(consts, tuple(rows), 0, 0, None, None, reason, consts.threshold)
    S = np.full(len(xs), np.nan)
    S[scope] = integrated_differences(bundle, xs[scope], ys[scope], n_jobs)
    lower = consts.lower_bound(dxy)
    bad = 0
    worst = math.inf
    for i, (x, y, r) in enumerate(zip(xs, ys, dxy)):
        if not scope[i]:
            rows.append((int(x), int(y), int(r), None, None, None, "skipped"))
            continue
        wm = witness_set(int(x), int(y), consts, d, bundle.g.weight).measure
        ok = S[i] >= lower[i] * (1 - rtol)
        bad += not ok
        worst = min(worst, S[i] / lower[i])
        rows.append((int(x), int(y), int(r), float(S[i]), float(lower[i]), wm, "ok" if ok else "violation"))
    dd = dxy[scope].astype(np.float64)
    slope = float(np.polyfit(dd, S[scope], 1)[0]) if len(np.unique(dd)) >= 2 else None
    return PropernessReport(consts, tuple(rows), int(scope.sum()), int(bad), float(worst), slope, None, consts.threshold)


# -- tree oracle -------------------------------------------------------------


def tree_oracle_vector(a: int, x: int, tree: MetricGraph, d: DistanceField | None = None) -> TangentVector:
    """Indicator of the neighbour of a on the geodesic towards x (zero when x = a)."""
    if not tree.is_tree():
        raise NotATreeError("tree oracle needs an acyclic graph")
    vals = np.zeros(tree.n)
    if a != x:
        nb = tree.neighbors(a)
        if d is not None:
            step = nb[d.matrix[nb, x] < d(a, x)]
        else:
            from scipy.sparse.csgraph import shortest_path

            dist = shortest_path(tree.adjacency, unweighted=True, indices=x)
            step = nb[dist[nb] < dist[a]]
        vals[int(step[0])] = 1.0
    return TangentVector(int(a), vals, np.ones(tree.n), 2.0)
