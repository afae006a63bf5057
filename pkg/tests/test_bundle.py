import math

import numpy as np
import pytest

from conftest import make_bundle
from tangentlp import freegroup as fg
from tangentlp.action import cycle_rotation
from tangentlp.bundle import (
    BundleParams,
    PropernessConstants,
    lp_norms,
    recenter,
    tangent_vector,
    tree_oracle_vector,
    verify_curvature,
    verify_norm_bound,
    verify_properness,
    witness_set,
)
from tangentlp.exceptions import BasepointMismatchError, NotATreeError, TangentLpError
from tangentlp.graph import cycle_graph, path_graph, random_tree
from tangentlp.metric import all_pairs_distances, growth_profile
from tangentlp.pseudometric import PseudoParams
from tangentlp.symmetry import tree_automorphism, tree_orbits, vertex_orbits


def test_E_for_free_group_profile():
    prm = BundleParams(PseudoParams.default(), 2.0, 0, growth_profile(fg.cayley_ball(2, 3), 0))
    assert prm.E == pytest.approx(4 / (1 - math.exp(-2)))
    assert prm.E == pytest.approx(4.6261, abs=1e-4)
    assert prm.kappa == -prm.epsilon
    assert prm.D_C(3) > prm.D_C(2)


def test_p_must_exceed_one():
    with pytest.raises(TangentLpError):
        BundleParams(PseudoParams.default(), 1.0, 0, growth_profile(path_graph(3), 0))


@pytest.mark.parametrize("g", [cycle_graph(10), path_graph(25), random_tree(30, seed=4)])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_norm_bound(g, p):
    b = make_bundle(g, p=p)
    rep = verify_norm_bound(b, vertex_orbits(g))
    assert rep.passed and rep.max_norm <= rep.bound


def test_vector_at_basepoint_is_generally_nonzero(tree3_bundle):
    v = tree3_bundle.tangent_vector(0, 0)
    assert v.norm > 0


def test_recenter(tree3_bundle):
    b = tree3_bundle
    aa = b.tangent_vector(2, 2)
    ax = b.tangent_vector(2, 9)
    ay = b.tangent_vector(2, 30)
    assert np.all(recenter(aa, aa).values == 0)
    diff = recenter(ax, aa) - recenter(ay, aa)
    assert np.allclose(diff.values, (ax - ay).values, rtol=0, atol=1e-15)
    assert recenter(ax, aa).norm <= 2 * b.params.norm_bound
    with pytest.raises(BasepointMismatchError):
        ax - b.tangent_vector(3, 9)


def test_tangent_vector_needs_matching_field(tree3_bundle):
    b = tree3_bundle
    with pytest.raises(BasepointMismatchError):
        tangent_vector(1, 2, b.params, b.field(0), b.d, b.g.weight)


def test_diff_norm_basic(tree3_bundle):
    b = tree3_bundle
    assert b.diff_norm(1, 5, 5) == 0.0
    assert b.diff_norm(1, 5, 7) == b.diff_norm(1, 7, 5)
    E = b.params.E ** 0.5
    assert b.diff_norm(1, 5, 7) <= E * b.field(1)(5, 7) * (1 + 1e-9)


def test_equivariance_under_tree_automorphisms(tree3, tree3_bundle):
    b = tree3_bundle
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(20):
        u, v = (int(t) for t in rng.integers(0, tree3.n, 2))
        perm = tree_automorphism(tree3, u, v)
        if perm is None:
            continue
        # the profile is anchored at the center, which every automorphism fixes
        assert perm[0] == 0
        for a, x in [(u, 5), (3, 40), (u, u)]:
            lhs = b.raw_vectors(perm[a])[perm[x]]
            rhs = np.empty(tree3.n)
            rhs[perm] = b.raw_vectors(a)[x]
            assert np.array_equal(lhs, rhs)
        checked += 1
    assert checked > 5


def test_equivariance_under_cycle_rotation():
    g = cycle_graph(9)
    b = make_bundle(g)
    perm = cycle_rotation(9).permutation("r")
    for a, x in [(0, 4), (2, 7), (5, 5)]:
        lhs = b.raw_vectors(perm[a])[perm[x]]
        rhs = np.empty(9)
        rhs[perm] = b.raw_vectors(a)[x]
        assert np.array_equal(lhs, rhs)


def _brute_orbits(g):
    import itertools

    edges = {frozenset(map(int, e)) for e in g.edges}
    reach = {v: {v} for v in range(g.n)}
    for perm in itertools.permutations(range(g.n)):
        if all(frozenset((perm[u], perm[v])) in edges for u, v in g.edges):
            for v in range(g.n):
                reach[v].add(perm[v])
    return {v: min(s) for v, s in reach.items()}


@pytest.mark.parametrize("seed", range(6))
def test_tree_orbits_match_brute_force(seed):
    g = random_tree(7, seed)
    orb = tree_orbits(g)
    brute = _brute_orbits(g)
    for u in range(g.n):
        for v in range(g.n):
            same = orb.rep[u] == orb.rep[v]
            assert same == (brute[u] == brute[v])
            perm = tree_automorphism(g, u, v)
            assert (perm is not None) == same
            if perm is not None:
                assert perm[u] == v
                edges = {frozenset(map(int, e)) for e in g.edges}
                assert all(frozenset((perm[a], perm[b])) in edges for a, b in g.edges)


def test_tree_ball_orbits_are_spheres():
    orb = vertex_orbits(fg.tree_ball(4, 6))
    assert orb.count == 7
    assert list(orb.sizes) == [1, 4, 12, 36, 108, 324, 972]


def test_curvature_orbit_reduction_is_exact():
    g = random_tree(25, seed=9)
    b = make_bundle(g)
    from tangentlp.symmetry import trivial_orbits

    r1 = verify_curvature(b, 2.0, orbits=vertex_orbits(g))
    r2 = verify_curvature(b, 2.0, orbits=trivial_orbits(g))
    assert r1.triples == r2.triples
    assert r1.violations == r2.violations == 0
    assert r1.worst_ratio == pytest.approx(r2.worst_ratio, rel=1e-12)
    assert r1.slope == pytest.approx(r2.slope, rel=1e-9)


def test_curvature_on_cycle_sampled_and_exhaustive():
    b = make_bundle(cycle_graph(14))
    ex = verify_curvature(b, 2.0)
    sa = verify_curvature(b, 2.0, "sampled", n_samples=500, seed=3)
    assert ex.passed and sa.passed
    assert sa.triples <= ex.triples
    with pytest.raises(TangentLpError):
        verify_curvature(b, 2.0, "sampled")


def test_recentering_leaves_reports_unchanged():
    g = path_graph(90)
    plain = make_bundle(g)
    rec = make_bundle(g, recentered=True)
    assert np.all(rec.tangent_vector(4, 4).values == 0)
    assert verify_curvature(plain, 2.0).as_dict() == verify_curvature(rec, 2.0).as_dict()
    c = PropernessConstants.from_bundle(plain)
    assert verify_properness(plain, c).as_dict() == verify_properness(rec, c).as_dict()
    assert verify_norm_bound(plain).as_dict() == verify_norm_bound(rec).as_dict()


def test_tree_oracle():
    g = fg.tree_ball(4, 3)
    d = all_pairs_distances(g)
    assert np.all(tree_oracle_vector(0, 0, g, d).values == 0)
    # x = "a", y = "ab" share their first step from 1
    ball = fg.word_ball(2, 3)
    ia, iab, iA = ball.index["a"], ball.index["ab"], ball.index["A"]
    diff = tree_oracle_vector(0, ia, g, d) - tree_oracle_vector(0, iab, g, d)
    assert np.all(diff.values == 0)
    # 1 lies strictly between "a" and "A"
    diff = tree_oracle_vector(0, ia, g, d) - tree_oracle_vector(0, iA, g, d)
    assert diff.norm == pytest.approx(math.sqrt(2))
    assert tree_oracle_vector(0, ia, g).values.tolist() == tree_oracle_vector(0, ia, g, d).values.tolist()
    with pytest.raises(NotATreeError):
        tree_oracle_vector(0, 1, cycle_graph(5))


def test_tree_oracle_curvature_vanishes_far_away():
    g = random_tree(40, seed=2)
    d = all_pairs_distances(g)
    C = 2
    for a in range(g.n):
        for x in range(g.n):
            for y in range(g.n):
                if d(x, y) <= C and d(a, x) > C:
                    diff = tree_oracle_vector(a, x, g, d) - tree_oracle_vector(a, y, g, d)
                    assert np.all(diff.values == 0)


def test_properness_constants_defaults():
    b = make_bundle(path_graph(20))
    c = PropernessConstants.from_bundle(b)
    ps = b.params.pseudo
    assert c.C == 6 and c.C_prime == 17 and c.threshold == 80
    assert ps.alpha - ps.beta * math.exp(-ps.epsilon * (c.C - 1)) <= 0 < ps.alpha - ps.beta * math.exp(-ps.epsilon * c.C)
    assert c.K == pytest.approx(ps.alpha * math.exp(-ps.epsilon * 6) - ps.beta * math.exp(-ps.epsilon * 14))
    assert c.K_prime > 0
    with pytest.raises(TangentLpError):
        PropernessConstants.from_bundle(b, C=2)


def test_witness_set_on_path():
    g = path_graph(120)
    d = all_pairs_distances(g)
    b = make_bundle(g)
    c = PropernessConstants.from_bundle(b)
    w = witness_set(0, 119, c, d)
    assert list(w.members) == list(range(17, 103))
    assert w.measure >= c.witness_floor(119)
    assert len(witness_set(0, int(2 * c.C_prime - c.C) - 1, c, d).members) == 0


def test_properness_skipped_on_small_graph():
    b = make_bundle(cycle_graph(12))
    rep = verify_properness(b, PropernessConstants.from_bundle(b))
    assert rep.in_scope == 0 and "too small" in rep.skipped_reason
    assert len(rep.rows) > 0 and all(r[-1] == "skipped" for r in rep.rows)
    assert rep.required_diameter == rep.constants.threshold


def test_lp_norms_weighted():
    v = np.array([[3.0, 4.0]])
    assert lp_norms(v, np.ones(2), 2.0)[0] == 5.0
    assert lp_norms(v, np.array([1.0, 0.25]), 2.0)[0] == pytest.approx(math.sqrt(13))
