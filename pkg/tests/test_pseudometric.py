import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangentlp import freegroup as fg
from tangentlp.exceptions import AdmissibilityError, InvalidEdgeError, MissingSliceError
from tangentlp.graph import cycle_graph, path_graph, random_tree
from tangentlp.metric import all_pairs_distances, hyperbolicity_delta
from tangentlp.pseudometric import (
    LOG2,
    PseudoParams,
    check_pseudometric_axioms,
    edge_cost,
    phi,
    pseudo_field,
    random_path_oracle,
    tree_pseudo_distance,
    verify_bounds,
)


def test_edge_cost_values():
    assert edge_cost(2, 2, 1.0) == pytest.approx(0.1065005692, abs=1e-10)
    assert edge_cost(2, 3, 1.0) == pytest.approx(0.0855482149, abs=1e-10)
    assert edge_cost(3, 2, 1.0) == edge_cost(2, 3, 1.0)


def test_edge_cost_rejects_non_edges():
    with pytest.raises(InvalidEdgeError):
        edge_cost(1, 3, 0.5)


def test_params_admissibility():
    prm = PseudoParams.default(0.5, 1.0)
    assert prm.epsilon == pytest.approx(LOG2 / 1.5)
    assert prm.alpha == pytest.approx(math.exp(-2 * prm.epsilon))
    assert prm.beta == pytest.approx(8 / prm.epsilon)
    with pytest.raises(AdmissibilityError):
        PseudoParams(1.0, 1.0, 0.0)
    with pytest.raises(AdmissibilityError):
        PseudoParams(-0.1, 1.0, 0.0)


def test_path_value():
    g = path_graph(8)
    f = pseudo_field(g, all_pairs_distances(g), 0, PseudoParams(0.5, 1.0))
    assert f(2, 5) == pytest.approx(0.5715888851, abs=1e-10)
    assert f(2, 5) == pytest.approx((math.exp(-1.0) - math.exp(-2.5)) / 0.5, abs=1e-14)


def test_phi_small_argument():
    assert phi(1e-12, 0.3) == pytest.approx(1e-12, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 40), st.integers(0, 1000), st.sampled_from([0.1, 0.5, LOG2]))
def test_tree_closed_form_matches_dijkstra(n, seed, eps):
    g = random_tree(n, seed)
    d = all_pairs_distances(g)
    a = seed % n
    f = pseudo_field(g, d, a, PseudoParams(eps, 1.0))
    x, y = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    assert np.max(np.abs(f.table - tree_pseudo_distance(d, a, x, y, eps))) < 1e-12


def test_missing_slice():
    g = path_graph(5)
    f = pseudo_field(g, all_pairs_distances(g), 0, PseudoParams.default(), sources=[1, 2])
    assert f.has(1) and not f.has(3)
    with pytest.raises(MissingSliceError):
        f.row(3)


@pytest.mark.parametrize("g", [cycle_graph(7), cycle_graph(16), fg.tree_ball(4, 3), path_graph(30)])
def test_bounds_and_axioms(g):
    d = all_pairs_distances(g)
    delta = 0.0 if g.is_tree() else hyperbolicity_delta(d).value
    prm = PseudoParams.default(delta, 1.0)
    for a in range(0, g.n, max(1, g.n // 5)):
        f = pseudo_field(g, d, a, prm)
        rep = verify_bounds(f, d)
        assert rep.passed, rep.as_dict()
        assert check_pseudometric_axioms(f)["passed"]
    assert random_path_oracle(g, d, f, n_paths=300, seed=2).passed


def test_pseudo_distance_vanishes_only_on_diagonal_of_finite_graph():
    g = cycle_graph(9)
    d = all_pairs_distances(g)
    f = pseudo_field(g, d, 0, PseudoParams.default(hyperbolicity_delta(d).value))
    off = f.table[~np.eye(9, dtype=bool)]
    assert np.all(off > 0)
