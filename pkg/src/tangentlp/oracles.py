"""Exact cocycles of F_k on its Cayley tree, used as independent oracles.

``V1`` is l^2 of oriented edges, with the coboundary of the vector that marks
edges pointing towards 1. ``V2`` is l^2(G, l^1(G)), with the coboundary of the
map sending h != 1 to the Dirac mass at its neighbour closest to 1. Both norms
are computed in closed form and by brute-force enumeration of the support
over a region of the tree; all arithmetic is on integers.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from . import freegroup as fg
from .exceptions import TangentLpError


def edge_cocycle_norm_sq(g: str) -> int:
    return 2 * len(g)


def edge_cocycle_norm(g: str) -> float:
    """2-norm sqrt(2|g|) of the oriented-edge cocycle."""
    return math.sqrt(edge_cocycle_norm_sq(g))


def double_cocycle_norm_sq(g: str) -> int:
    if not g:
        return 0
    return 4 * len(g) - 2


def double_cocycle_norm(g: str) -> float:
    """Nested 2-of-1 norm sqrt(4|g| - 2) of the vertex cocycle (0 at the identity)."""
    return math.sqrt(double_cocycle_norm_sq(g))


def _parent(h: str) -> str:
    return h[:-1]


def neighbourhood(k: int, g: str, r: int) -> list[str]:
    """Vertices within distance r of the geodesic [1, g], in a fixed order."""
    seen: dict[str, None] = {}
    frontier = [g[:i] for i in range(len(g) + 1)]
    for v in frontier:
        seen[v] = None
    for _ in range(r):
        nxt = []
        for v in frontier:
            for s in fg.alphabet(k):
                u = fg.multiply(v, s)
                if u not in seen:
                    seen[u] = None
                    nxt.append(u)
        frontier = nxt
    return list(seen)


def edge_cocycle_support(k: int, g: str, region) -> dict[tuple[str, str], int]:
    """Nonzero values of c(g)(e) = d(e) - d(g^-1 e) over oriented edges inside ``region``.

    d(u -> v) = 1 when v is closer to 1 than u, i.e. v is the parent of u.
    """
    ginv = fg.inverse(g)
    region = set(region)
    out = {}
    for u in region:
        for s in fg.alphabet(k):
            v = fg.multiply(u, s)
            if v not in region:
                continue
            here = 1 if v == _parent(u) and u else 0
            gu, gv = fg.multiply(ginv, u), fg.multiply(ginv, v)
            there = 1 if gu and gv == _parent(gu) else 0
            val = here - there
            if val:
                out[(u, v)] = val
    return out


def double_cocycle_support(k: int, g: str, region) -> dict[str, dict[str, int]]:
    """Nonzero c(g)(h) = d(h) - g.d(g^-1 h) for h in ``region``, as sparse inner vectors."""
    ginv = fg.inverse(g)
    out = {}
    for h in region:
        inner: dict[str, int] = defaultdict(int)
        if h:
            inner[_parent(h)] += 1
        gh = fg.multiply(ginv, h)
        if gh:
            inner[fg.multiply(g, _parent(gh))] -= 1
        inner = {k2: v for k2, v in inner.items() if v}
        if inner:
            out[h] = inner
    return out


@dataclass(frozen=True)
class OracleCheck:
    word: str
    edge_norm_sq: int
    edge_brute_sq: int
    double_norm_sq: int
    double_brute_sq: int
    support_on_geodesic: bool

    @property
    def passed(self) -> bool:
        return (
            self.edge_norm_sq == self.edge_brute_sq
            and self.double_norm_sq == self.double_brute_sq
            and self.support_on_geodesic
        )

    def as_dict(self) -> dict:
        return {
            "word": fg.label(self.word),
            "length": len(self.word),
            "edge_norm_sq": self.edge_norm_sq,
            "edge_brute_sq": self.edge_brute_sq,
            "double_norm_sq": self.double_norm_sq,
            "double_brute_sq": self.double_brute_sq,
            "support_on_geodesic": self.support_on_geodesic,
            "passed": self.passed,
        }


def brute_force_check(k: int, g: str, margin: int = 2) -> OracleCheck:
    """Enumerate both supports over the ``margin``-neighbourhood of [1, g]."""
    if not fg.is_reduced(g):
        raise TangentLpError(f"{g!r} is not reduced")
    region = neighbourhood(k, g, margin)
    geo = {g[:i] for i in range(len(g) + 1)}
    e = edge_cocycle_support(k, g, region)
    v = double_cocycle_support(k, g, region)
    e_sq = sum(x * x for x in e.values())
    v_sq = sum(sum(abs(t) for t in inner.values()) ** 2 for inner in v.values())
    on_geo = all(u in geo and w in geo for u, w in e) and all(h in geo for h in v)
    return OracleCheck(g, edge_cocycle_norm_sq(g), e_sq, double_cocycle_norm_sq(g), v_sq, on_geo)
