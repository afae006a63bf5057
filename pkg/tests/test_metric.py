import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangentlp import freegroup as fg
from tangentlp.exceptions import HyperbolicityCapError, TangentLpError
from tangentlp.graph import cycle_graph, from_edge_list, path_graph, random_tree
from tangentlp.metric import (
    all_pairs_distances,
    ball_masses,
    bfs_distances,
    gromov_product,
    growth_profile,
    hyperbolicity_delta,
    non_collapsing,
    p_threshold,
)


def naive_delta(d):
    n = d.n
    M = d.matrix
    best = 0.0
    for a, x, y, z in itertools.product(range(n), repeat=4):
        gp = lambda u, v: 0.5 * (M[u, a] + M[v, a] - M[u, v])
        best = max(best, min(gp(x, z), gp(y, z)) - gp(x, y))
    return best


def test_gromov_product_on_path():
    d = all_pairs_distances(path_graph(6))
    assert gromov_product(d, 2, 5, 0) == 2.0
    assert gromov_product(d, 1, 4, 3) == 0.0


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_cycles_match_naive(n):
    d = all_pairs_distances(cycle_graph(n))
    assert hyperbolicity_delta(d).value == naive_delta(d)


def test_c4_delta_and_witness():
    d = all_pairs_distances(cycle_graph(4))
    est = hyperbolicity_delta(d)
    assert est.value == 1.0 and not est.is_lower_bound
    assert est.witness is not None


def test_petersen_like_graph_matches_naive():
    # K_{2,3} plus a pendant vertex
    g = from_edge_list([("a", "x"), ("a", "y"), ("a", "z"), ("b", "x"), ("b", "y"), ("b", "z"), ("z", "t")])
    d = all_pairs_distances(g)
    assert hyperbolicity_delta(d).value == naive_delta(d)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 14), st.integers(0, 10_000))
def test_trees_have_zero_delta(n, seed):
    d = all_pairs_distances(random_tree(n, seed))
    assert hyperbolicity_delta(d).value == 0.0


def test_non_exact_modes_are_lower_bounds():
    d = all_pairs_distances(cycle_graph(12))
    exact = hyperbolicity_delta(d).value
    s = hyperbolicity_delta(d, "sampled", n_samples=2000, seed=1)
    f = hyperbolicity_delta(d, "fixed_basepoint", basepoint=0)
    assert s.is_lower_bound and f.is_lower_bound
    assert s.value <= exact and f.value <= exact


def test_sampled_needs_seed_and_cap_enforced():
    d = all_pairs_distances(cycle_graph(10))
    with pytest.raises(TangentLpError):
        hyperbolicity_delta(d, "sampled")
    with pytest.raises(HyperbolicityCapError):
        hyperbolicity_delta(d, cap=5)


def test_growth_profile_on_path():
    g = path_graph(11)
    prof = growth_profile(g, 5)
    assert list(prof.f) == [1, 3, 5, 7, 9, 11]
    assert prof.h_prime == 3.0
    # polynomial growth: the log-slope vanishes as the path grows
    assert growth_profile(path_graph(2001), 1000).entropy < 0.01


def test_growth_profile_on_free_group():
    g = fg.cayley_ball(2, 8)
    prof = growth_profile(g, 0)
    assert list(prof.f) == [2 * 3**r - 1 for r in range(9)]
    assert prof.h_prime == 5.0
    assert abs(prof.entropy - math.log(3)) < 0.05


def test_degenerate_profile():
    prof = growth_profile(path_graph(2), 0)
    assert prof.degenerate and prof.entropy == 0.0


def test_non_collapsing_and_ball_masses():
    g = path_graph(10)
    d = all_pairs_distances(g)
    nc = non_collapsing(g, 1)
    assert nc.v == 2.0 and nc.argmin in (0, 9)
    assert np.array_equal(ball_masses(g, 2), (d.matrix <= 2).sum(axis=1))
    assert non_collapsing(g, 2, d).v == non_collapsing(g, 2).v


def test_bfs_matches_distance_rows():
    g = random_tree(40, seed=1)
    d = all_pairs_distances(g)
    for o in (0, 7, 39):
        assert np.array_equal(bfs_distances(g, o), d.row(o))


def test_p_threshold():
    assert p_threshold(math.log(3), 0.0) == 1.0
    assert p_threshold(2.0, 1.0) == pytest.approx(2.0 / math.log(2))
    with pytest.raises(TangentLpError):
        p_threshold(-1.0, 0.0)
