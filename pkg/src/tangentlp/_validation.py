"""Input coercion shared by the estimator wrappers and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import GraphError, TangentLpError
from .graph import MetricGraph, from_edge_list


def check_graph(G) -> MetricGraph:
    """Accept a MetricGraph or an iterable of (u, v) label pairs."""
    if isinstance(G, MetricGraph):
        return G
    try:
        pairs = [tuple(e) for e in G]
    except TypeError:
        raise GraphError(f"expected a MetricGraph or an edge list, got {type(G).__name__}") from None
    if not pairs or any(len(e) != 2 for e in pairs):
        raise GraphError("edge list must be a non-empty sequence of (u, v) pairs")
    return from_edge_list(pairs)


def check_vertex(g: MetricGraph, v) -> int:
    return g.vertex(v)


def check_positive(name: str, value, allow_none: bool = False, strict: bool = True):
    if value is None and allow_none:
        return None
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise TangentLpError(f"{name} must be a finite real, got {value!r}")
    if (strict and value <= 0) or (not strict and value < 0):
        raise TangentLpError(f"{name} must be {'positive' if strict else 'nonnegative'}, got {value!r}")
    return float(value)


def check_seed(seed, required: bool = False):
    """Seeds are plain nonnegative integers so runs serialise and replay exactly."""
    if seed is None:
        if required:
            raise TangentLpError("sampled modes need an explicit integer seed")
        return None
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
        raise TangentLpError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)
