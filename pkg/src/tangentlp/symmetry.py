"""Vertex orbits of measure-preserving graph automorphisms.

Exhaustive certifications over basepoints only need one basepoint per orbit:
every quantity they check is invariant under automorphisms preserving the
measure. Orbits are computed exactly for trees (via canonical forms rooted at
the center) and for uniformly weighted cycles; any other graph falls back to
singleton orbits, which is always correct.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import MetricGraph


@dataclass(frozen=True)
class Orbits:
    """Partition of the vertex set; ``rep[v]`` is the smallest vertex of v's orbit."""

    rep: np.ndarray
    method: str

    @property
    def representatives(self) -> np.ndarray:
        return np.unique(self.rep)

    @property
    def sizes(self) -> np.ndarray:
        """Orbit sizes aligned with :attr:`representatives`."""
        return np.unique(self.rep, return_counts=True)[1]

    @property
    def count(self) -> int:
        return len(self.representatives)


def trivial_orbits(g: MetricGraph) -> Orbits:
    return Orbits(np.arange(g.n), "trivial")


def tree_center(g: MetricGraph) -> list[int]:
    """One or two central vertices, found by peeling leaves."""
    deg = g.degree.copy()
    remaining = g.n
    layer = [v for v in range(g.n) if deg[v] <= 1]
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for u in g.neighbors(v):
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(int(u))
        layer = nxt
    return sorted(layer)


def _rooted_canon(g: MetricGraph, roots: list[int]):
    """Canonical ids of rooted subtrees (weights included), hanging away from ``roots``."""
    n = g.n
    parent = np.full(n, -1)
    order = []
    seen = np.zeros(n, dtype=bool)
    seen[roots] = True
    stack = list(roots)
    while stack:
        v = stack.pop()
        order.append(v)
        for u in g.neighbors(v):
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                stack.append(int(u))
    children: list[list[int]] = [[] for _ in range(n)]
    for v in order:
        if parent[v] >= 0:
            children[parent[v]].append(v)
    table: dict = {}
    canon = np.empty(n, dtype=np.int64)
    for v in reversed(order):
        key = (float(g.weight[v]), tuple(sorted(canon[c] for c in children[v])))
        canon[v] = table.setdefault(key, len(table))
    return parent, order, canon


def tree_orbits(g: MetricGraph) -> Orbits:
    """Exact orbits of the automorphism group of a weighted tree.

    Two vertices are equivalent iff their chains of canonical subtree ids from
    the center down to them coincide.
    """
    centers = tree_center(g)
    parent, order, canon = _rooted_canon(g, centers)
    key: dict[int, tuple] = {}
    for v in order:
        key[v] = (key[parent[v]] if parent[v] >= 0 else ()) + (int(canon[v]),)
    first: dict[tuple, int] = {}
    rep = np.empty(g.n, dtype=np.int64)
    for v in range(g.n):
        rep[v] = first.setdefault(key[v], v)
    return Orbits(rep, "tree-canonical")


def is_cycle(g: MetricGraph) -> bool:
    return g.n >= 3 and g.m == g.n and bool(np.all(g.degree == 2))


def vertex_orbits(g: MetricGraph) -> Orbits:
    if g.is_tree():
        return tree_orbits(g)
    if is_cycle(g) and np.all(g.weight == g.weight[0]):
        return Orbits(np.zeros(g.n, dtype=np.int64), "cycle")
    return trivial_orbits(g)


def tree_automorphism(g: MetricGraph, u: int, v: int) -> np.ndarray | None:
    """A vertex permutation that is an automorphism of the tree and maps u to v.

    Returns ``None`` when u and v lie in different orbits.
    """
    centers = tree_center(g)
    parent, order, canon = _rooted_canon(g, centers)
    children: list[list[int]] = [[] for _ in range(g.n)]
    for w in order:
        if parent[w] >= 0:
            children[parent[w]].append(w)

    def path(w):
        out = [w]
        while parent[out[-1]] >= 0:
            out.append(int(parent[out[-1]]))
        return out[::-1]

    pu, pv = path(u), path(v)
    if [canon[w] for w in pu] != [canon[w] for w in pv]:
        return None
    perm = np.full(g.n, -1, dtype=np.int64)
    forced = dict(zip(pu, pv))

    def match(a, b):
        perm[a] = b
        ca = sorted(children[a], key=lambda w: (canon[w], w not in forced))
        cb = sorted(children[b], key=lambda w: (canon[w], w not in forced.values()))
        # pair forced children first, then the rest by canonical id
        fa = [w for w in ca if w in forced]
        pairs = [(w, forced[w]) for w in fa]
        ra = [w for w in ca if w not in forced]
        rb = [w for w in cb if w not in {forced[w2] for w2 in fa}]
        ra.sort(key=lambda w: canon[w])
        rb.sort(key=lambda w: canon[w])
        pairs += list(zip(ra, rb))
        for x, y in pairs:
            match(x, y)

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * g.n + 100))
    try:
        roots_u = [pu[0]] + [c for c in centers if c != pu[0]]
        roots_v = [pv[0]] + [c for c in centers if c != pv[0]]
        for a, b in zip(roots_u, roots_v):
            match(a, b)
    finally:
        sys.setrecursionlimit(limit)
    return perm
