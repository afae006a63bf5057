"""Reduced words in free groups and their Cayley trees.

Elements of the free group on ``k`` generators are reduced strings over the
letters ``a, b, c, ...``; the upper-case letter is the inverse generator and
the empty string is the identity. The Cayley graph is the ``2k``-regular tree
with ``w -- ws`` edges, on which the group acts by left multiplication.
"""
from __future__ import annotations

import string
from functools import cached_property, lru_cache

import numpy as np

from .exceptions import TangentLpError
from .graph import MetricGraph

IDENTITY = ""
IDENTITY_LABEL = "1"


def alphabet(k: int) -> str:
    """Letters of F_k in canonical order ``a A b B ...``."""
    if not 1 <= k <= 26:
        raise TangentLpError(f"free group rank must be in [1, 26], got {k}")
    return "".join(c + c.upper() for c in string.ascii_lowercase[:k])


def inverse(w: str) -> str:
    return w[::-1].swapcase()


def reduce_word(w: str) -> str:
    out: list[str] = []
    for c in w:
        if out and out[-1] == c.swapcase():
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def is_reduced(w: str) -> bool:
    return all(a != b.swapcase() for a, b in zip(w, w[1:]))


def multiply(u: str, v: str) -> str:
    """Product of two reduced words, reduced (cancellation only at the seam)."""
    i = 0
    n = min(len(u), len(v))
    while i < n and u[len(u) - 1 - i] == v[i].swapcase():
        i += 1
    return u[: len(u) - i] + v[i:]


def common_prefix(u: str, v: str) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def distance(u: str, v: str) -> int:
    """Tree distance |u^-1 v| between reduced words."""
    return len(u) + len(v) - 2 * common_prefix(u, v)


def parse_element(text: str, k: int | None = None) -> str:
    """Parse and reduce a word such as ``"aab"``, ``"aB"`` or ``"1"``.

    ``"e"`` is also read as the identity when it cannot be a generator (k <= 4).
    """
    text = text.strip()
    if text in ("", IDENTITY_LABEL) or (text == "e" and (k is None or k <= 4)):
        return IDENTITY
    if not text.isalpha():
        raise TangentLpError(f"bad free-group word {text!r}")
    if k is not None:
        allowed = set(alphabet(k))
        bad = set(text) - allowed
        if bad:
            raise TangentLpError(f"letters {sorted(bad)} not in F_{k}")
    return reduce_word(text)


def label(w: str) -> str:
    return w if w else IDENTITY_LABEL


def sphere_size(k: int, n: int) -> int:
    if n == 0:
        return 1
    return 2 * k * (2 * k - 1) ** (n - 1)


def ball_size(k: int, r: int) -> int:
    return sum(sphere_size(k, n) for n in range(r + 1))


def random_word(k: int, length: int, rng) -> str:
    letters = alphabet(k)
    out: list[str] = []
    for _ in range(length):
        prev = out[-1].swapcase() if out else None
        choices = [c for c in letters if c != prev]
        out.append(choices[int(rng.integers(len(choices)))])
    return "".join(out)


def words_of_length(k: int, length: int):
    """All reduced words of the given length, in canonical order."""
    letters = alphabet(k)
    frontier = [""]
    for _ in range(length):
        frontier = [w + c for w in frontier for c in letters if not w or c != w[-1].swapcase()]
    return frontier


class WordBall:
    """Breadth-first enumeration of the ball B(1, r) in F_k.

    Ids are assigned level by level, so ``depth`` is non-decreasing and each
    sphere occupies the contiguous slice ``level_slice(d)``.
    """

    def __init__(self, k: int, radius: int):
        if radius < 0:
            raise TangentLpError("radius must be nonnegative")
        self.k = k
        self.radius = radius
        letters = alphabet(k)
        words = [IDENTITY]
        parent = [-1]
        starts = [0]
        lo = 0
        for _ in range(radius):
            hi = len(words)
            starts.append(hi)
            for i in range(lo, hi):
                w = words[i]
                back = w[-1].swapcase() if w else None
                for c in letters:
                    if c != back:
                        words.append(w + c)
                        parent.append(i)
            lo = hi
        starts.append(len(words))
        self.words = words
        self.parent = np.asarray(parent, dtype=np.int64)
        self._starts = starts
        self.index = {w: i for i, w in enumerate(words)}

    def __len__(self):
        return len(self.words)

    @cached_property
    def depth(self) -> np.ndarray:
        d = np.empty(len(self.words), dtype=np.int64)
        for r in range(self.radius + 1):
            d[self.level_slice(r)] = r
        return d

    def level_slice(self, r: int) -> slice:
        return slice(self._starts[r], self._starts[r + 1])

    def common_prefix_with(self, u: str) -> np.ndarray:
        """``common_prefix(u, w)`` for every word w of the ball, vectorised."""
        n = len(self.words)
        on_path = np.zeros(n, dtype=bool)
        for j in range(min(len(u), self.radius) + 1):
            on_path[self.index[u[:j]]] = True
        out = np.zeros(n, dtype=np.int64)
        for r in range(1, self.radius + 1):
            sl = self.level_slice(r)
            out[sl] = np.where(on_path[sl], r, out[self.parent[sl]])
        return out

    def graph(self) -> MetricGraph:
        child = np.arange(1, len(self.words))
        edges = np.stack([self.parent[1:], child], axis=1)
        labels = tuple(label(w) for w in self.words)
        return MetricGraph(edges, np.ones(len(self.words)), labels)


@lru_cache(maxsize=8)
def word_ball(k: int, radius: int) -> WordBall:
    return WordBall(k, radius)


def cayley_ball(k: int, radius: int) -> MetricGraph:
    """Ball of the given radius in the Cayley tree of F_k (a 2k-regular tree ball).

    Vertex labels are the reduced words, with ``"1"`` for the identity.
    """
    return word_ball(k, radius).graph()


def tree_ball(degree: int, radius: int) -> MetricGraph:
    """Ball in the ``degree``-regular tree; ``degree`` must be even."""
    if degree % 2:
        raise TangentLpError("only even degrees are realised as free-group Cayley trees")
    return cayley_ball(degree // 2, radius)
