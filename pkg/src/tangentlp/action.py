"""Group actions, the induced representation on sections, and the base cocycle.

A section assigns to each point x a vector in the fiber over x. The group
acts on sections by (pi_g F)(x) = phi_g(F(g^-1 x)), and the base section
f_o(x) = xo gives the cocycle c(g) = f_o - pi_g f_o, whose value at x is
xo - x(go).

Two frames realise the fibers:

* :class:`GraphFrame` for a finite graph with a permutation action. Fiber
  coordinates are the vertices and phi_g relabels them.
* :class:`TreeFrame` for a free group acting on its Cayley tree. Fiber
  coordinates over x are local: eta in a ball B(1, r_f) stands for the
  point x eta. In these coordinates phi_g is the identity and xy becomes
  V(x^-1 y) for one fixed function V.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import freegroup as fg
from .bundle import BundleParams, GraphBundle, PropernessConstants, default_slack, lp_norms, lp_powers
from .config import AGREEMENT_ATOL, DEFAULT_FIBER_RADIUS, IDENTITY_ATOL
from .exceptions import GraphError, SummabilityError, TangentLpError, TruncationError
from .graph import MetricGraph
from .metric import GrowthProfile
from .pseudometric import PseudoParams, phi, pseudo_field

# -- words -------------------------------------------------------------------

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^\{?(-?1)\}?)?$")


@dataclass(frozen=True)
class Word:
    """A product of generators ``(label, +1 | -1)``, applied right to left on points."""

    tokens: tuple[tuple[str, int], ...] = ()

    @classmethod
    def parse(cls, text: str, generators: Sequence[str] | None = None) -> "Word":
        """Parse ``"a b^-1 c"`` (token syntax) or ``"abC"`` (compact syntax).

        Compact syntax treats every character as a generator and an upper-case
        letter as the inverse of its lower-case generator; it is used when the
        text has no separators and all generator labels are single letters.
        """
        text = text.strip()
        if text in ("", fg.IDENTITY_LABEL) or (text == "e" and "e" not in (generators or "abcd")):
            return cls(())
        single = generators is None or all(len(s) == 1 and s.islower() for s in generators)
        if single and re.fullmatch(r"[A-Za-z]+", text):
            toks = tuple((c.lower(), -1 if c.isupper() else 1) for c in text)
        else:
            toks = []
            for part in re.split(r"[\s,*]+", text):
                if not part:
                    continue
                m = _TOKEN.match(part)
                if not m:
                    raise TangentLpError(f"bad word token {part!r}")
                toks.append((m.group(1), int(m.group(2) or 1)))
            toks = tuple(toks)
        if generators is not None:
            bad = sorted({s for s, _ in toks} - set(generators))
            if bad:
                raise TangentLpError(f"unknown generators {bad}")
        return cls(toks)

    def inverse(self) -> "Word":
        return Word(tuple((s, -e) for s, e in reversed(self.tokens)))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.tokens + other.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def reduced(self) -> "Word":
        out: list[tuple[str, int]] = []
        for s, e in self.tokens:
            if out and out[-1] == (s, -e):
                out.pop()
            else:
                out.append((s, e))
        return Word(tuple(out))

    @property
    def text(self) -> str:
        if not self.tokens:
            return fg.IDENTITY_LABEL
        if all(len(s) == 1 and s.islower() for s, _ in self.tokens):
            return "".join(s if e == 1 else s.upper() for s, e in self.tokens)
        return " ".join(s if e == 1 else f"{s}^-1" for s, e in self.tokens)

    def free(self) -> str:
        """Reduced free-group string; generators must be single lower-case letters."""
        if not all(len(s) == 1 and s.islower() for s, _ in self.tokens):
            raise TangentLpError("free-group words use single lower-case generator letters")
        return fg.reduce_word("".join(s if e == 1 else s.upper() for s, e in self.tokens))


def as_word(w) -> Word:
    return w if isinstance(w, Word) else Word.parse(str(w))


# -- actions -----------------------------------------------------------------


@dataclass(frozen=True)
class IsometryCertificate:
    passed: bool
    generators: int
    edges_checked: int
    witness: dict | None

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "generators": self.generators,
            "edges_checked": self.edges_checked,
            "witness": self.witness,
        }


class PermutationAction:
    """Generators given as vertex permutations of a finite graph."""

    def __init__(self, g: MetricGraph, generators: dict[str, Sequence[int]]):
        if not generators:
            raise TangentLpError("an action needs at least one generator")
        self.graph = g
        self.generators: dict[str, np.ndarray] = {}
        self._inverse: dict[str, np.ndarray] = {}
        for name, perm in generators.items():
            perm = np.asarray(perm, dtype=np.int64)
            if perm.shape != (g.n,) or not np.array_equal(np.sort(perm), np.arange(g.n)):
                raise GraphError(f"generator {name!r} is not a permutation of the {g.n} vertices")
            inv = np.empty_like(perm)
            inv[perm] = np.arange(g.n)
            perm.setflags(write=False)
            inv.setflags(write=False)
            self.generators[name] = perm
            self._inverse[name] = inv

    @classmethod
    def from_json(cls, g: MetricGraph, path) -> "PermutationAction":
        """Load ``{"gen": ["image of label 0", ...]}`` listing images in vertex order."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        gens = {}
        for name, images in data.items():
            if len(images) != g.n:
                raise GraphError(f"generator {name!r} lists {len(images)} images for {g.n} vertices")
            gens[name] = [g.vertex(str(v)) for v in images]
        return cls(g, gens)

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.graph.n)

    def permutation(self, word) -> np.ndarray:
        """Vertex map of the word; tokens act right to left."""
        w = as_word(word)
        perm = np.arange(self.graph.n)
        for s, e in w.tokens:
            if s not in self.generators:
                raise TangentLpError(f"unknown generator {s!r}")
            step = self.generators[s] if e == 1 else self._inverse[s]
            perm = perm[step]  # (perm o step)
        return perm

    def apply(self, word, x) -> int:
        return int(self.permutation(word)[x])

    def check_isometry(self) -> IsometryCertificate:
        g = self.graph
        edges = {(int(u), int(v)) for u, v in g.edges}
        for name, perm in self.generators.items():
            for u, v in g.edges:
                a, b = int(perm[u]), int(perm[v])
                if (min(a, b), max(a, b)) not in edges:
                    return IsometryCertificate(False, len(self.generators), g.m, {
                        "generator": name,
                        "edge": [g.labels[u], g.labels[v]],
                        "image": [g.labels[a], g.labels[b]],
                    })
            bad = np.flatnonzero(g.weight[perm] != g.weight)
            if len(bad):
                v = int(bad[0])
                return IsometryCertificate(False, len(self.generators), g.m, {
                    "generator": name,
                    "vertex": g.labels[v],
                    "weight": float(g.weight[v]),
                    "image_weight": float(g.weight[perm[v]]),
                })
        return IsometryCertificate(True, len(self.generators), g.m * len(self.generators), None)


def cycle_rotation(n: int) -> PermutationAction:
    from .graph import cycle_graph

    return PermutationAction(cycle_graph(n), {"r": (np.arange(n) + 1) % n})


class FreeGroupAction:
    """Left multiplication of F_k on its Cayley tree, truncated at ``radius``."""

    def __init__(self, k: int, radius: int):
        fg.alphabet(k)
        if radius < 0:
            raise TangentLpError("radius must be nonnegative")
        self.k = k
        self.radius = radius

    @property
    def generators(self) -> tuple[str, ...]:
        return tuple(fg.alphabet(self.k)[::2])

    def element(self, word) -> str:
        if isinstance(word, str):
            return fg.parse_element(word, self.k)
        return fg.parse_element(word.free(), self.k)

    def apply(self, word, x: str) -> str:
        out = fg.multiply(self.element(word), x)
        if len(out) > self.radius:
            raise TruncationError(
                f"{fg.label(out)} lies outside the generated ball of radius {self.radius}",
                len(out),
            )
        return out

    def check_isometry(self, max_radius: int = 8) -> IsometryCertificate:
        """Every edge w -- ws of B(1, min(radius - 1, max_radius)) maps to an edge under each generator."""
        ball = fg.word_ball(self.k, max(min(self.radius - 1, max_radius), 0))
        checked = 0
        for s in fg.alphabet(self.k):
            for i in range(1, len(ball)):
                w = ball.words[i]
                u = ball.words[ball.parent[i]]
                a, b = fg.multiply(s, u), fg.multiply(s, w)
                checked += 1
                if fg.distance(a, b) != 1:
                    return IsometryCertificate(False, self.k, checked, {
                        "generator": s,
                        "edge": [fg.label(u), fg.label(w)],
                        "image": [fg.label(a), fg.label(b)],
                    })
        return IsometryCertificate(True, self.k, checked, None)


def apply_word(action, word, x):
    return action.apply(word, x)


def check_isometry(action) -> IsometryCertificate:
    return action.check_isometry()


def parse_action(text: str, graph: MetricGraph | None = None, radius: int | None = None):
    """``free:k`` or a JSON generator file for ``graph``."""
    m = re.fullmatch(r"free:(\d+)", text.strip())
    if m:
        return FreeGroupAction(int(m.group(1)), radius if radius is not None else 16)
    if graph is None:
        raise TangentLpError("a permutation action file needs a graph")
    return PermutationAction.from_json(graph, text)


# -- frames ------------------------------------------------------------------


class GraphFrame:
    """Fibers of a finite graph bundle; coordinates are vertices."""

    def __init__(self, action: PermutationAction, bundle: GraphBundle):
        if action.graph is not bundle.g and action.graph.n != bundle.g.n:
            raise TangentLpError("action and bundle live on different graphs")
        self.action = action
        self.bundle = bundle
        self.p = bundle.params.p
        self.o = bundle.params.o

    @property
    def fiber_weight(self) -> np.ndarray:
        return self.bundle.g.weight

    @property
    def fiber_dim(self) -> int:
        return self.bundle.g.n

    def point_weight(self, points) -> np.ndarray:
        return self.bundle.g.weight[np.asarray(points, dtype=np.int64)]

    def contains(self, x) -> bool:
        return 0 <= int(x) < self.bundle.g.n

    def origin(self):
        return self.o

    def translate(self, word, x):
        return self.action.apply(word, x)

    def phi(self, word, values: np.ndarray) -> np.ndarray:
        """Relabel coordinates: (phi_g v)(g xi) = v(xi)."""
        inv = np.argsort(self.action.permutation(word))
        return values[..., inv]

    @lru_cache(maxsize=None)
    def _base_row(self, x: int, target: int) -> np.ndarray:
        fld = pseudo_field(self.bundle.g, self.bundle.d, x, self.bundle.params.pseudo, [target])
        return fld.table[0] * self.bundle.coordinate_weight(x)

    def vector(self, x, target) -> np.ndarray:
        """The vector x target over x."""
        return self._base_row(int(x), int(target))

    def base_values(self, points) -> np.ndarray:
        return np.stack([self.vector(x, self.o) for x in points]) if len(points) else np.zeros((0, self.fiber_dim))

    def cocycle_closed_form(self, word, points) -> np.ndarray:
        go = self.translate(word, self.o)
        return np.stack([self.vector(x, self.o) - self.vector(x, go) for x in points])

    def default_points(self) -> list:
        return list(range(self.bundle.g.n))


def tree_profile(k: int, radius: int) -> GrowthProfile:
    """Growth profile of the infinite 2k-regular tree, tabulated to ``radius``."""
    f = np.array([float(fg.ball_size(k, r)) for r in range(radius + 1)])
    ratios = f[1:] / f[:-1]
    r = np.arange(1, radius + 1, dtype=np.float64)
    y = np.log(f[1:])
    rc = r - r.mean()
    h = float(rc @ (y - y.mean()) / (rc @ rc)) if radius >= 2 else 0.0
    f.setflags(write=False)
    return GrowthProfile(0, f, float(ratios.max()) if len(ratios) else 1.0, h, (1, radius), radius < 2)


class TreeFrame:
    """Local fibers over the Cayley tree of F_k, truncated to B(1, fiber_radius).

    ``radius`` bounds the points at which sections may be evaluated.
    """

    def __init__(self, action: FreeGroupAction, params: BundleParams, fiber_radius: int = DEFAULT_FIBER_RADIUS):
        self.action = action
        self.k = action.k
        self.params = params
        self.p = params.p
        self.eps = params.epsilon
        self.fiber_radius = fiber_radius
        self.ball = fg.word_ball(self.k, fiber_radius)
        depth = self.ball.depth
        self._eta_len = depth
        self._phi_eta = phi(depth, self.eps)
        self._w = params.coordinate_weight(depth)
        self.o = fg.IDENTITY

    @classmethod
    def build(
        cls,
        action: FreeGroupAction,
        epsilon: float | None = None,
        p: float = 2.0,
        D: float = 1.0,
        fiber_radius: int = DEFAULT_FIBER_RADIUS,
        profile_radius: int | None = None,
    ) -> "TreeFrame":
        pseudo = PseudoParams.default(0.0, D) if epsilon is None else PseudoParams(epsilon, D, 0.0)
        prof = tree_profile(action.k, profile_radius or max(action.radius + 2, fiber_radius + 2, 64))
        return cls(action, BundleParams(pseudo, p, 0, prof), fiber_radius)

    @property
    def fiber_weight(self) -> np.ndarray:
        return np.ones(len(self.ball))

    @property
    def fiber_dim(self) -> int:
        return len(self.ball)

    def point_weight(self, points) -> np.ndarray:
        return np.ones(len(points))

    def contains(self, x) -> bool:
        return len(x) <= self.action.radius

    def origin(self):
        return self.o

    def translate(self, word, x):
        return self.action.apply(word, x)

    def phi(self, word, values: np.ndarray) -> np.ndarray:
        return values

    def local(self, u: str) -> np.ndarray:
        """V(u)(eta) = d^1_eps(u, eta) w(|eta|) via the tree closed form."""
        cp = self.ball.common_prefix_with(u)
        d = phi(len(u), self.eps) + self._phi_eta - 2.0 * phi(cp, self.eps)
        return d * self._w

    def local_difference(self, u: str, v: str) -> np.ndarray:
        """V(u) - V(v) without cancelling the two large phi(|.|) terms."""
        a, b = len(u), len(v)
        dphi = (math.exp(-self.eps * b) - math.exp(-self.eps * a)) / self.eps
        cu = phi(self.ball.common_prefix_with(u), self.eps)
        cv = phi(self.ball.common_prefix_with(v), self.eps)
        return (dphi - 2.0 * (cu - cv)) * self._w

    def vector(self, x: str, target: str) -> np.ndarray:
        return self.local(fg.multiply(fg.inverse(x), target))

    def base_values(self, points) -> np.ndarray:
        if not len(points):
            return np.zeros((0, self.fiber_dim))
        return np.stack([self.local(fg.inverse(x)) for x in points])

    def cocycle_closed_form(self, word, points) -> np.ndarray:
        g = self.action.element(word)
        rows = []
        for x in points:
            xi = fg.inverse(x)
            rows.append(self.local_difference(xi, fg.multiply(xi, g)))
        return np.stack(rows) if rows else np.zeros((0, self.fiber_dim))

    def default_points(self) -> list:
        return list(fg.word_ball(self.k, min(self.action.radius, 4)).words)


# -- sections ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SectionField:
    """A section evaluated lazily: ``evaluate(points)`` returns one fiber vector per point.

    ``contains(x)`` is the domain predicate; evaluation outside raises a
    truncation error.
    """

    frame: object
    evaluate: Callable[[Sequence], np.ndarray]
    contains: Callable[[object], bool]
    name: str = "section"

    def values(self, points) -> np.ndarray:
        points = list(points)
        for x in points:
            if not self.contains(x):
                r = len(x) if isinstance(x, str) else None
                raise TruncationError(f"section {self.name} is not defined at {_label(x)}", r)
        return self.evaluate(points)

    def norm(self, points=None) -> float:
        return self.norm_p(points) ** (1.0 / self.frame.p)

    def norm_p(self, points=None) -> float:
        points = self.frame.default_points() if points is None else list(points)
        vals = self.values(points)
        per = lp_powers(vals, self.frame.fiber_weight, self.frame.p)
        return float(per @ self.frame.point_weight(points))

    def __add__(self, other: "SectionField") -> "SectionField":
        return SectionField(
            self.frame,
            lambda pts: self.evaluate(pts) + other.evaluate(pts),
            lambda x: self.contains(x) and other.contains(x),
            f"({self.name} + {other.name})",
        )

    def __sub__(self, other: "SectionField") -> "SectionField":
        return SectionField(
            self.frame,
            lambda pts: self.evaluate(pts) - other.evaluate(pts),
            lambda x: self.contains(x) and other.contains(x),
            f"({self.name} - {other.name})",
        )

    def __neg__(self) -> "SectionField":
        return SectionField(self.frame, lambda pts: -self.evaluate(pts), self.contains, f"-{self.name}")


def _label(x) -> str:
    return fg.label(x) if isinstance(x, str) else str(x)


def base_section(frame) -> SectionField:
    """f_o(x) = xo."""
    return SectionField(frame, frame.base_values, frame.contains, "f_o")


def zero_section(frame) -> SectionField:
    return SectionField(frame, lambda pts: np.zeros((len(pts), frame.fiber_dim)), frame.contains, "0")


def random_section(frame, seed: int, support: Sequence | None = None) -> SectionField:
    """Seeded pseudo-random section; the value at x depends only on (seed, x).

    With ``support`` given, the section vanishes off that set.
    """
    keep = None if support is None else set(support)

    def value(x):
        if keep is not None and x not in keep:
            return np.zeros(frame.fiber_dim)
        key = [ord(c) for c in x] if isinstance(x, str) else [int(x)]
        rng = np.random.default_rng([seed, len(key), *key])
        return rng.standard_normal(frame.fiber_dim)

    return SectionField(frame, lambda pts: np.stack([value(x) for x in pts]), frame.contains, f"rand{seed}")


def recentered_base_section(frame) -> SectionField:
    """x -> xo - xx."""
    def ev(pts):
        return np.stack([frame.vector(x, frame.origin()) - frame.vector(x, x) for x in pts])

    return SectionField(frame, ev, frame.contains, "f_o_rec")


def _elem(frame, word):
    """Group element in the frame's native format (reduced string or Word)."""
    return frame.action.element(word) if isinstance(frame, TreeFrame) else as_word(word)


def _inv(frame, w):
    return fg.inverse(w) if isinstance(frame, TreeFrame) else w.inverse()


def _wtext(w) -> str:
    return fg.label(w) if isinstance(w, str) else w.text


def representation_apply(frame, word, F: SectionField) -> SectionField:
    """(pi_g F)(x) = phi_g(F(g^-1 x))."""
    w = _elem(frame, word)
    winv = _inv(frame, w)

    def inside(x):
        if not frame.contains(x):
            return False
        try:
            y = frame.translate(winv, x)
        except TruncationError:
            return False
        return F.contains(y)

    def ev(pts):
        ys = [frame.translate(winv, x) for x in pts]
        return frame.phi(w, F.evaluate(ys))

    return SectionField(frame, ev, inside, f"pi({_wtext(w)}){F.name}")


def cocycle(frame, word) -> SectionField:
    """c(g) = f_o - pi_g f_o, evaluated through the representation."""
    w = _elem(frame, word)
    f_o = base_section(frame)
    c = f_o - representation_apply(frame, w, f_o)
    return SectionField(frame, c.evaluate, c.contains, f"c({_wtext(w)})")


def cocycle_closed_form(frame, word) -> SectionField:
    """c(g)(x) = xo - x(go), evaluated directly."""
    w = _elem(frame, word)
    return SectionField(frame, lambda pts: frame.cocycle_closed_form(w, pts), frame.contains, f"c*({_wtext(w)})")


def affine_apply(frame, word, v: SectionField) -> SectionField:
    """g . v = pi_g v + c(g)."""
    return representation_apply(frame, word, v) + cocycle(frame, word)


def compose(frame, g, h):
    """The product gh, in the word format the frame's action expects."""
    if isinstance(frame, TreeFrame):
        return fg.multiply(_elem(frame, g), _elem(frame, h))
    return as_word(g) * as_word(h)


# -- identity checks -------------------------------------------------------------


def comparison_points(frame, words: Sequence, n_random: int = 128, seed=0, base_radius: int = 2) -> list:
    """Points x where every translate needed by the identity checks stays in the domain.

    For finite graphs this is every vertex. For free groups it is the ball
    B(1, base_radius) plus ``n_random`` seeded words of random length, kept
    only when ``w^-1 x`` lies in the truncation for every listed word w.
    """
    if isinstance(frame, GraphFrame):
        return frame.default_points()
    R = frame.action.radius
    rng = np.random.default_rng(seed)
    cand = list(fg.word_ball(frame.k, min(base_radius, R)).words)
    for _ in range(n_random):
        cand.append(fg.random_word(frame.k, int(rng.integers(0, R + 1)), rng))
    elems = [fg.inverse(_elem(frame, w)) for w in words]
    out = []
    seen = set()
    for x in cand:
        if x in seen:
            continue
        seen.add(x)
        if all(len(fg.multiply(e, x)) <= R for e in elems):
            out.append(x)
    return out


@dataclass(frozen=True)
class ResidualReport:
    name: str
    points: int
    max_residual: float
    argmax: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "points": self.points,
            "max_residual": self.max_residual,
            "argmax": self.argmax,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _residual(name, frame, points, lhs: np.ndarray, rhs: np.ndarray, tol) -> ResidualReport:
    if not len(points):
        raise TangentLpError(f"{name}: no comparable points inside the truncation")
    r = lp_norms(lhs - rhs, frame.fiber_weight, frame.p)
    i = int(np.argmax(r))
    return ResidualReport(name, len(points), float(r[i]), _label(points[i]), tol)


def verify_cocycle_identity(frame, g, h, points=None, tol: float = IDENTITY_ATOL, seed=0) -> ResidualReport:
    """max_x ||c(gh)(x) - c(g)(x) - (pi_g c(h))(x)||."""
    gh = compose(frame, g, h)
    points = comparison_points(frame, [g, h, gh], seed=seed) if points is None else list(points)
    lhs = cocycle(frame, gh).values(points)
    rhs = (cocycle(frame, g) + representation_apply(frame, g, cocycle(frame, h))).values(points)
    return _residual("cocycle_identity", frame, points, lhs, rhs, tol)


def verify_closed_form(frame, g, points=None, tol: float = AGREEMENT_ATOL, seed=0) -> ResidualReport:
    points = comparison_points(frame, [g], seed=seed) if points is None else list(points)
    a = cocycle(frame, g).values(points)
    b = cocycle_closed_form(frame, g).values(points)
    # agreement is pointwise in every coordinate
    if not len(points):
        raise TangentLpError("closed form: no comparable points inside the truncation")
    err = np.max(np.abs(a - b), axis=1)
    i = int(np.argmax(err))
    return ResidualReport("closed_form_agreement", len(points), float(err[i]), _label(points[i]), tol)


def verify_representation(frame, g, h, F: SectionField, points=None, tol: float = AGREEMENT_ATOL, seed=0) -> dict:
    """Isometry ||pi_g F|| = ||F|| on matched domains and pi_g pi_h = pi_gh."""
    gh = compose(frame, g, h)
    pts = comparison_points(frame, [g, h, gh], seed=seed) if points is None else list(points)
    if not pts:
        raise TangentLpError("representation check: no comparable points")
    ginv = _inv(frame, _elem(frame, g))
    pre = [frame.translate(ginv, x) for x in pts]
    lhs = representation_apply(frame, g, F).norm_p(pts)
    rhs = F.norm_p(pre)
    iso = abs(lhs - rhs) / max(1.0, abs(rhs))
    a = representation_apply(frame, g, representation_apply(frame, h, F)).values(pts)
    b = representation_apply(frame, gh, F).values(pts)
    hom = float(np.max(np.abs(a - b)))
    return {
        "points": len(pts),
        "isometry_error": float(iso),
        "homomorphism_error": hom,
        "tolerance": tol,
        "passed": iso <= tol and hom <= tol,
    }


# -- norms and bounds on the free group -------------------------------------


def _branch_letter(k: int, g: str, i: int) -> str | None:
    banned = set()
    if i < len(g):
        banned.add(g[i])
    if i > 0:
        banned.add(g[i - 1].swapcase())
    for c in fg.alphabet(k):
        if c not in banned:
            return c
    return None


def tripods(k: int, g: str, R: int):
    """Orbit representatives of B(1, R) under tree automorphisms fixing 1 and g.

    Yields (x, count, i, l): x leaves the geodesic [1, g] at g[:i] and walks
    l further steps; ``count`` is the number of such points.
    """
    L = len(g)
    for i in range(min(L, R) + 1):
        yield g[:i], 1, i, 0
        c = _branch_letter(k, g, i)
        branches = 2 * k - (i > 0) - (i < L)
        if c is None or branches == 0:
            continue
        for l in range(1, R - i + 1):
            yield g[:i] + c * l, branches * (2 * k - 1) ** (l - 1), i, l


@dataclass(frozen=True)
class CocycleNorm:
    word: str
    length: int
    radius: int
    norm_p: float
    norm: float
    witness_measure: float
    upper_bound: float | None
    lower_bound: float | None
    tail_bound: float | None
    in_regime: bool

    @property
    def passed(self) -> bool:
        ok = True
        if self.upper_bound is not None:
            ok &= self.norm_p <= self.upper_bound * (1 + 1e-9)
        if self.in_regime and self.lower_bound is not None:
            ok &= self.norm_p >= self.lower_bound * (1 - 1e-9)
        return bool(ok)

    def as_dict(self) -> dict:
        return {
            "word": fg.label(self.word) if isinstance(self.word, str) else str(self.word),
            "length": self.length,
            "radius": self.radius,
            "norm_p": self.norm_p,
            "norm": self.norm,
            "witness_measure": self.witness_measure,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "tail_bound": self.tail_bound,
            "in_regime": self.in_regime,
            "passed": self.passed,
        }


def tail_bound(params: BundleParams, C: float, R: int, f, h_tail: float) -> float:
    """D_C^p (h'-1) f(R) e^(-p eps R) / (1 - h' e^(-p eps)), with h' the tail growth ratio."""
    p, eps = params.p, params.epsilon
    if p * eps <= math.log(h_tail):
        raise SummabilityError(p, math.log(h_tail) / eps)
    return params.D_C(C) ** p * (h_tail - 1) * f(R) * math.exp(-p * eps * R) / (1 - h_tail * math.exp(-p * eps))


def default_radius(consts: PropernessConstants, length: int) -> int:
    return int(math.ceil(length + consts.threshold + 2))


def free_constants(frame: TreeFrame, C: float | None = None) -> PropernessConstants:
    ps = frame.params.pseudo
    C = float(default_slack(ps) if C is None else C)
    v = float(fg.ball_size(frame.k, int(math.floor(C / 2 + 1e-12))))
    return PropernessConstants.compute(frame.params, v, C, f=lambda r: float(fg.ball_size(frame.k, int(math.floor(r + 1e-12)))))


def cocycle_norm(frame: TreeFrame, word, R: int | None = None, consts: PropernessConstants | None = None) -> CocycleNorm:
    """||c(g)||_p over B(1, R) by summing over tripod orbits, with both bounds.

    The upper bound sums D_C^p e^(-p eps n) mu(S_n) for n <= R with
    C = d(1, g) and adds the tail beyond R. The lower bound
    K' mu(A(1, g)) applies when d(1, g) >= 4C' + 2C.
    """
    g = frame.action.element(word)
    L = len(g)
    consts = consts or free_constants(frame)
    R = default_radius(consts, L) if R is None else int(R)
    if R < L:
        raise TruncationError(f"radius {R} does not reach g = {fg.label(g)}", L)
    k, p, eps = frame.k, frame.p, frame.eps
    total = 0.0
    wit = 0.0
    reps, counts, meta = [], [], []
    for x, cnt, i, l in tripods(k, g, R):
        reps.append(x)
        counts.append(float(cnt))
        meta.append((i, l))
    vals = frame.cocycle_closed_form(g, reps)
    per = lp_powers(vals, frame.fiber_weight, p)
    total = float(np.dot(per, counts))
    for (i, l), cnt in zip(meta, counts):
        if 2 * l <= consts.C and i + l >= consts.C_prime and L - i + l >= consts.C_prime:
            wit += cnt
    # upper bound: curvature at slack d(1, g) on each sphere, plus the tail
    Cg = float(L)
    Dp = frame.params.D_C(Cg) ** p
    ns = np.arange(R + 1)
    spheres = np.array([float(fg.sphere_size(k, int(n))) for n in ns])
    head = float(np.sum(Dp * np.exp(-p * eps * ns) * spheres))
    fR = lambda r: float(fg.ball_size(k, int(r)))
    h_tail = fR(R + 1) / fR(R)
    tail = tail_bound(frame.params, Cg, R, fR, h_tail) if L > 0 else 0.0
    upper = head + tail if L > 0 else 0.0
    in_regime = L >= consts.threshold
    lower = consts.K_prime * wit if in_regime else None
    return CocycleNorm(g, L, R, total, total ** (1.0 / p), wit, upper, lower, tail, in_regime)


def cocycle_norm_graph(frame: GraphFrame, word) -> float:
    """||c(g)||_p^p on a finite graph, over every vertex."""
    return cocycle(frame, word).norm_p(frame.default_points())
