import json
import math

import numpy as np
import pytest

from conftest import make_bundle
from tangentlp import freegroup as fg
from tangentlp.action import (
    FreeGroupAction,
    GraphFrame,
    PermutationAction,
    TreeFrame,
    Word,
    affine_apply,
    base_section,
    cocycle,
    cocycle_closed_form,
    cocycle_norm,
    comparison_points,
    cycle_rotation,
    free_constants,
    parse_action,
    random_section,
    recentered_base_section,
    representation_apply,
    tripods,
    verify_closed_form,
    verify_cocycle_identity,
    verify_representation,
    zero_section,
)
from tangentlp.bundle import lp_powers
from tangentlp.exceptions import GraphError, SummabilityError, TangentLpError, TruncationError
from tangentlp.graph import cycle_graph, path_graph
from tangentlp.pseudometric import LOG2


@pytest.fixture(scope="module")
def frame():
    return TreeFrame.build(FreeGroupAction(2, 16), LOG2, 2.0)


@pytest.fixture(scope="module")
def cycle_frame():
    g = cycle_graph(8)
    return GraphFrame(cycle_rotation(8), make_bundle(g))


def test_word_parsing():
    assert Word.parse("a b^-1 c").tokens == (("a", 1), ("b", -1), ("c", 1))
    assert Word.parse("aB").tokens == (("a", 1), ("b", -1))
    assert Word.parse("1").tokens == ()
    w = Word.parse("ab")
    assert (w * w.inverse()).reduced().tokens == ()
    assert Word.parse("s1 s2^-1", ["s1", "s2"]).text == "s1 s2^-1"
    with pytest.raises(TangentLpError):
        Word.parse("q", ["r"])
    with pytest.raises(TangentLpError):
        Word.parse("a^2 b", ["a", "b"])


def test_permutation_action_from_json(tmp_path):
    g = cycle_graph(5)
    (tmp_path / "act.json").write_text(json.dumps({"r": ["1", "2", "3", "4", "0"]}))
    act = PermutationAction.from_json(g, tmp_path / "act.json")
    assert act.apply("r", 0) == 1
    assert act.apply("r^-1", 0) == 4
    assert act.check_isometry().passed
    (tmp_path / "short.json").write_text(json.dumps({"r": ["1", "2"]}))
    with pytest.raises(GraphError):
        PermutationAction.from_json(g, tmp_path / "short.json")


def test_words_act_right_to_left():
    g = path_graph(3)
    act = PermutationAction(g, {"s": [2, 1, 0], "t": [0, 1, 2]})
    assert act.apply("s t", 0) == act.apply("s", act.apply("t", 0))
    rot = cycle_rotation(6)
    assert rot.apply("r r r^-1", 2) == 3


def test_isometry_negative_control():
    g = path_graph(4)
    act = PermutationAction(g, {"s": [1, 0, 2, 3]})
    cert = act.check_isometry()
    assert not cert.passed
    assert cert.witness is not None and cert.witness["generator"] == "s"


def test_free_action_truncation():
    act = FreeGroupAction(2, 16)
    with pytest.raises(TruncationError) as info:
        act.apply("aaaa", "a" * 15)
    assert info.value.required_radius == 19
    assert act.check_isometry().passed
    assert isinstance(parse_action("free:3"), FreeGroupAction)


def test_tree_frame_matches_dijkstra_bundle(frame):
    ball = fg.word_ball(2, 6)
    b = make_bundle(ball.graph())
    V = b.raw_vectors(0)
    for u in ["", "a", "abA", "bbb", "aBaBa", "abab"]:
        assert np.max(np.abs(frame.local(u) - V[ball.index[u]])) < 1e-15
    for u, v in [("ab", "abab"), ("a", "B"), ("", "bbbbbb")]:
        ref = frame.local(u) - frame.local(v)
        assert np.max(np.abs(frame.local_difference(u, v) - ref)) < 1e-14


def test_cocycle_identity_and_closed_form(frame):
    rng = np.random.default_rng(5)
    for i in range(10):
        g = fg.random_word(2, int(rng.integers(0, 7)), rng)
        h = fg.random_word(2, int(rng.integers(0, 7)), rng)
        assert verify_cocycle_identity(frame, g, h, seed=i).passed
        assert verify_closed_form(frame, g, seed=i).passed
        assert verify_representation(frame, g, h, random_section(frame, i), seed=i)["passed"]


def test_cocycle_at_identity_is_zero(frame, cycle_frame):
    pts = comparison_points(frame, ["1"])
    assert np.all(cocycle(frame, "1").values(pts) == 0)
    assert np.all(cocycle(cycle_frame, "1").values(range(8)) == 0)


def test_base_section_is_fixed(frame, cycle_frame):
    for fr, g, pts in [
        (frame, "abA", comparison_points(frame, ["abA"])),
        (cycle_frame, "r r r", list(range(8))),
    ]:
        f_o = base_section(fr)
        moved = affine_apply(fr, g, f_o).values(pts)
        assert np.max(np.abs(moved - f_o.values(pts))) < 1e-12


def test_recentered_section_gives_same_cocycle(frame, cycle_frame):
    for fr, g, pts in [(frame, "ab", comparison_points(frame, ["ab"])), (cycle_frame, "r", list(range(8)))]:
        f = recentered_base_section(fr)
        c2 = (f - representation_apply(fr, g, f)).values(pts)
        assert np.max(np.abs(c2 - cocycle(fr, g).values(pts))) < 1e-12


def test_finite_cycle_cocycle(cycle_frame):
    fr = cycle_frame
    assert verify_cocycle_identity(fr, "r r", "r^-1").passed
    assert verify_closed_form(fr, "r r r").passed
    rep = verify_representation(fr, "r", "r r", random_section(fr, 1))
    assert rep["passed"] and rep["isometry_error"] <= 1e-12
    # the action has a fixed vector, so the cocycle is bounded: c(r^8) = 0
    assert np.max(np.abs(cocycle(fr, "r " * 8).values(range(8)))) < 1e-12


def test_section_truncation(frame):
    with pytest.raises(TruncationError):
        zero_section(frame).values(["a" * 17])
    shifted = representation_apply(frame, "aaa", base_section(frame))
    assert not shifted.contains("A" * 15)


def test_tripods_cover_the_ball():
    for g in ["", "a", "abA", "abab"]:
        total = sum(c for _, c, _, _ in tripods(2, g, 7))
        assert total == fg.ball_size(2, 7)


def test_norm_matches_ball_enumeration():
    fr = TreeFrame.build(FreeGroupAction(2, 6), LOG2, 2.0)
    R = 6
    words = list(fg.word_ball(2, R).words)
    for g in ["ab", "aBa"]:
        brute = float(lp_powers(cocycle_closed_form(fr, g).values(words), fr.fiber_weight, 2.0).sum())
        res = cocycle_norm(fr, g, R=R)
        assert res.norm_p == pytest.approx(brute, rel=1e-12)
        assert res.norm == pytest.approx(math.sqrt(brute), rel=1e-12)


def test_norm_bounds_and_monotonicity(frame):
    consts = free_constants(frame)
    assert consts.C == 6 and consts.C_prime == 17 and consts.threshold == 80
    vals = [cocycle_norm(frame, ("ab" * 6)[:L], R=30, consts=consts) for L in range(13)]
    assert vals[0].norm_p == 0.0
    assert all(b.norm_p >= a.norm_p for a, b in zip(vals, vals[1:]))
    assert all(v.norm_p <= v.upper_bound for v in vals[1:])
    assert all(v.lower_bound is None and not v.in_regime for v in vals)
    assert cocycle_norm(frame, "abab", R=30).norm_p == pytest.approx(cocycle_norm(frame, "BaaB", R=30).norm_p, rel=1e-12)


def test_norm_requires_summable_tail():
    fr = TreeFrame.build(FreeGroupAction(2, 16), 0.1, 2.0)
    with pytest.raises(SummabilityError):
        cocycle_norm(fr, "ab", R=20)
    with pytest.raises(TruncationError):
        cocycle_norm(TreeFrame.build(FreeGroupAction(2, 16)), "ababab", R=4)


def test_graph_frame_rejects_foreign_bundle():
    with pytest.raises(TangentLpError):
        GraphFrame(cycle_rotation(6), make_bundle(cycle_graph(7)))
