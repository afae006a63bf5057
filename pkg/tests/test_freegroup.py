import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangentlp import freegroup as fg
from tangentlp.exceptions import TangentLpError

words = st.text(alphabet="aAbB", max_size=12).map(fg.reduce_word)


def test_reduction_and_inverse():
    assert fg.reduce_word("abBA") == ""
    assert fg.reduce_word("aabBb") == "aab"
    assert fg.inverse("abA") == "aBA"
    assert fg.multiply("ab", "Ba") == "aa"


def test_identity_labels():
    assert fg.parse_element("1", 2) == ""
    assert fg.parse_element("", 2) == ""
    assert fg.parse_element("e", 2) == ""
    assert fg.label("") == "1"


def test_parse_rejects_unknown_letters():
    with pytest.raises(TangentLpError):
        fg.parse_element("az", 2)


@pytest.mark.parametrize("r", range(0, 11))
def test_ball_sizes(r):
    assert fg.ball_size(2, r) == 2 * 3**r - 1
    assert fg.sphere_size(2, r) == (1 if r == 0 else 4 * 3 ** (r - 1))


def test_words_of_length_are_distinct_and_reduced():
    ws = list(fg.words_of_length(2, 5))
    assert len(ws) == len(set(ws)) == 4 * 3**4
    assert all(fg.is_reduced(w) and len(w) == 5 for w in ws)


def test_word_ball_graph_is_regular_inside():
    ball = fg.word_ball(2, 3)
    g = ball.graph()
    inner = [i for i, w in enumerate(ball.words) if len(w) < 3]
    assert np.all(g.degree[inner] == 4)
    assert g.is_tree()
    for i, w in enumerate(ball.words[1:], 1):
        assert ball.words[ball.parent[i]] == w[:-1]
        assert ball.depth[i] == len(w)


def test_random_word_is_reduced():
    rng = np.random.default_rng(0)
    for L in range(20):
        w = fg.random_word(3, L, rng)
        assert len(w) == L and fg.is_reduced(w)


@settings(max_examples=200, deadline=None)
@given(words, words, words)
def test_group_axioms(u, v, w):
    assert fg.multiply(fg.multiply(u, v), w) == fg.multiply(u, fg.multiply(v, w))
    assert fg.multiply(u, fg.inverse(u)) == ""
    assert fg.distance(u, w) <= fg.distance(u, v) + fg.distance(v, w)
    # left multiplication is an isometry
    assert fg.distance(fg.multiply(v, u), fg.multiply(v, w)) == fg.distance(u, w)
