"""Finite unit-edge graphs carrying a vertex measure.

A :class:`MetricGraph` is the discrete model of a metric measured space: the
metric is the path metric with unit edges, the measure a positive weight per
vertex (counting measure by default).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import DisconnectedGraphError, GraphError, GraphParseError


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Connected simple graph with unit edges and positive vertex weights.

    ``edges`` is stored as an ``(m, 2)`` integer array with ``u < v`` in each
    row, rows sorted lexicographically.
    """

    edges: np.ndarray
    weight: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = len(self.weight)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weight = np.asarray(self.weight, dtype=np.float64)
        if n == 0:
            raise GraphError("graph must have at least one vertex")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise GraphError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            i = int(np.flatnonzero(edges[:, 0] == edges[:, 1])[0])
            raise GraphError(f"self-loop at vertex {edges[i, 0]}")
        edges = np.sort(edges, axis=1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]
        if len(edges) > 1:
            dup = np.all(edges[1:] == edges[:-1], axis=1)
            if dup.any():
                u, v = edges[int(np.flatnonzero(dup)[0])]
                raise GraphError(f"duplicate edge ({u}, {v})")
        if not np.all(np.isfinite(weight)) or np.any(weight <= 0):
            raise GraphError("vertex weights must be finite and strictly positive")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise GraphError(f"{len(labels)} labels for {n} vertices")
        if len(set(labels)) != n:
            raise GraphError("vertex labels must be unique")
        edges.setflags(write=False)
        weight = weight.copy()
        weight.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "labels", labels)
        self._check_connected()

    def _check_connected(self):
        k, comp = connected_components(self.adjacency, directed=False)
        if k > 1:
            other = np.flatnonzero(comp != comp[0])
            bad = np.flatnonzero(comp == comp[other[0]])
            raise DisconnectedGraphError([self.labels[i] for i in bad], k)

    @property
    def n(self) -> int:
        return len(self.weight)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def _csr_layout(self):
        # CSR layout of the symmetric adjacency, plus the edge id behind each slot
        n, m = self.n, self.m
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((cols, rows))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols[order], eid[order]

    @cached_property
    def adjacency(self) -> csr_matrix:
        indptr, indices, _ = self._csr_layout
        return csr_matrix(
            (np.ones(len(indices)), indices, indptr), shape=(self.n, self.n)
        )

    def weighted_adjacency(self, edge_weight: np.ndarray) -> csr_matrix:
        """Symmetric sparse matrix with ``edge_weight[e]`` on both slots of edge e."""
        indptr, indices, eid = self._csr_layout
        return csr_matrix(
            (np.asarray(edge_weight, dtype=np.float64)[eid], indices, indptr),
            shape=(self.n, self.n),
        )

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices, _ = self._csr_layout
        return indices[indptr[v] : indptr[v + 1]]

    @cached_property
    def degree(self) -> np.ndarray:
        return np.diff(self._csr_layout[0])

    def is_tree(self) -> bool:
        return self.m == self.n - 1

    def vertex(self, v) -> int:
        """Resolve a vertex given as an index or a label."""
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if 0 <= v < self.n:
                return int(v)
            raise GraphError(f"vertex index {v} out of range [0, {self.n})")
        try:
            return self.index[str(v)]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def with_weights(self, weight) -> "MetricGraph":
        return MetricGraph(self.edges, weight, self.labels)

    def relabel(self, perm: Sequence[int]) -> "MetricGraph":
        """Image of the graph under the vertex bijection ``v -> perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        labels = tuple(self.labels[i] for i in inv)
        return MetricGraph(perm[self.edges], self.weight[inv], labels)


def from_edge_list(pairs: Iterable[tuple], weights: dict | None = None) -> MetricGraph:
    """Build a graph from labelled edges; vertices are numbered by first appearance."""
    index: dict[str, int] = {}
    edges = []
    for u, v in pairs:
        iu = index.setdefault(str(u), len(index))
        iv = index.setdefault(str(v), len(index))
        edges.append((iu, iv))
    weight = np.ones(len(index))
    for lab, w in (weights or {}).items():
        if str(lab) not in index:
            raise GraphError(f"measure given for unknown vertex {lab!r}")
        weight[index[str(lab)]] = w
    return MetricGraph(np.array(edges, dtype=np.int64).reshape(-1, 2), weight, tuple(index))


def single_vertex(label: str = "0") -> MetricGraph:
    return MetricGraph(np.empty((0, 2), dtype=np.int64), np.ones(1), (label,))


def path_graph(n: int) -> MetricGraph:
    """Path 0 - 1 - ... - (n-1)."""
    if n == 1:
        return single_vertex()
    i = np.arange(n - 1)
    return MetricGraph(np.stack([i, i + 1], axis=1), np.ones(n))


def cycle_graph(n: int) -> MetricGraph:
    if n < 3:
        raise GraphError("a simple cycle needs at least 3 vertices")
    i = np.arange(n)
    return MetricGraph(np.stack([i, (i + 1) % n], axis=1), np.ones(n))


def random_tree(n: int, seed=None) -> MetricGraph:
    """Uniform random recursive tree: vertex i attaches to a uniform earlier vertex."""
    rng = np.random.default_rng(seed)
    if n == 1:
        return single_vertex()
    parents = np.array([rng.integers(0, i) for i in range(1, n)], dtype=np.int64)
    return MetricGraph(np.stack([parents, np.arange(1, n)], axis=1), np.ones(n))


def read_measure(path) -> dict[str, float]:
    path = Path(path)
    weights: dict[str, float] = {}
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            text = line.rstrip("\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            parts = text.split("\t")
            if len(parts) != 2:
                raise GraphParseError(path, line_no, "expected 'vertex<TAB>weight'")
            try:
                w = float(parts[1])
            except ValueError:
                raise GraphParseError(path, line_no, f"bad weight {parts[1]!r}") from None
            if not np.isfinite(w) or w <= 0:
                raise GraphParseError(path, line_no, "weight must be finite and positive")
            weights[parts[0]] = w
    return weights


def read_graph(path, measure=None) -> MetricGraph:
    """Read a ``u<TAB>v`` edge list, optionally with a ``v<TAB>weight`` measure file.

    Blank lines and lines starting with ``#`` are skipped. Vertices missing
    from the measure file get weight 1.
    """
    path = Path(path)
    pairs = []
    seen: set[tuple[str, str]] = set()
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            text = line.rstrip("\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            parts = text.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise GraphParseError(path, line_no, "expected 'u<TAB>v'")
            u, v = parts
            if u == v:
                raise GraphParseError(path, line_no, f"self-loop at {u!r}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphParseError(path, line_no, f"duplicate edge {u!r} - {v!r}")
            seen.add(key)
            pairs.append((u, v))
    if not pairs:
        raise GraphParseError(path, 0, "no edges")
    weights = read_measure(measure) if measure is not None else None
    return from_edge_list(pairs, weights)


def write_graph(graph: MetricGraph, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for u, v in graph.edges:
            fh.write(f"{graph.labels[u]}\t{graph.labels[v]}\n")
