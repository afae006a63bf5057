import pytest

from tangentlp import freegroup as fg
from tangentlp.bundle import BundleParams, GraphBundle
from tangentlp.metric import all_pairs_distances, growth_profile, hyperbolicity_delta
from tangentlp.pseudometric import PseudoParams


def make_bundle(g, p=2.0, o=0, D=1.0, **kw):
    d = all_pairs_distances(g)
    delta = 0.0 if g.is_tree() else hyperbolicity_delta(d).value
    prm = BundleParams(PseudoParams.default(delta, D), p, o, growth_profile(g, o, d))
    return GraphBundle(g, d, prm, **kw)


@pytest.fixture(scope="session")
def tree3():
    return fg.tree_ball(4, 3)


@pytest.fixture(scope="session")
def tree3_bundle(tree3):
    return make_bundle(tree3)
