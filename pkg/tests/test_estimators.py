import math

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tangentlp import freegroup as fg
from tangentlp.estimators import HyperbolicityEstimator, PseudoDistance, TangentBundle, VolumeGrowth
from tangentlp.exceptions import TangentLpError
from tangentlp.graph import cycle_graph, path_graph


@pytest.mark.parametrize(
    "est",
    [HyperbolicityEstimator(mode="sampled", random_state=3), VolumeGrowth(r_max=4), PseudoDistance(epsilon=0.5), TangentBundle(p=3.0)],
)
def test_params_round_trip(est):
    c = clone(est)
    assert c.get_params() == est.get_params()
    c.set_params(**est.get_params())


def test_hyperbolicity_estimator():
    e = HyperbolicityEstimator().fit(cycle_graph(4))
    assert e.delta_ == 1.0 and not e.is_lower_bound_
    s = HyperbolicityEstimator(mode="sampled", n_samples=500, random_state=0).fit(cycle_graph(10))
    exact = HyperbolicityEstimator().fit(cycle_graph(10)).delta_
    assert s.is_lower_bound_ and s.delta_ <= exact


def test_volume_growth():
    vg = VolumeGrowth().fit(fg.cayley_ball(2, 6))
    assert vg.h_prime_ == 5.0
    assert list(vg.transform([0, 1, 2])) == [1, 5, 17]
    assert abs(vg.entropy_ - math.log(3)) < 0.1


def test_pseudo_distance_transform():
    pd = PseudoDistance(basepoint=0, epsilon=0.5).fit(path_graph(8))
    rows = pd.transform([2, 5])
    assert rows.shape == (2, 8)
    assert rows[0, 5] == pytest.approx(0.5715888851, abs=1e-10)


def test_tangent_bundle_transform():
    tb = TangentBundle().fit(fg.tree_ball(4, 2))
    X = tb.transform([(0, 1), (0, 2), (3, 3)])
    assert X.shape == (3, 17)
    assert tb.delta_ == 0.0
    assert tb.curvature(2.0).passed
    assert tb.properness_constants().C == 6


def test_not_fitted_and_bad_params():
    with pytest.raises(NotFittedError):
        TangentBundle().transform([(0, 1)])
    with pytest.raises(TangentLpError):
        TangentBundle(D=-1.0).fit(path_graph(4))
    with pytest.raises(TangentLpError):
        PseudoDistance(basepoint=99).fit(path_graph(4))
