"""scikit-learn style wrappers around the functional core.

Each estimator takes its configuration in ``__init__``, learns from a graph in
``fit`` and exposes fitted attributes with a trailing underscore, so
``get_params``/``set_params``/``clone`` work as usual.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph, check_positive, check_seed, check_vertex
from .bundle import BundleParams, GraphBundle, PropernessConstants, verify_curvature
from .metric import all_pairs_distances, growth_profile, hyperbolicity_delta
from .pseudometric import PseudoParams, pseudo_field


class HyperbolicityEstimator(BaseEstimator):
    """Four-point hyperbolicity constant of a graph."""

    def __init__(self, mode="exact", n_samples=100_000, random_state=None, cap=300):
        self.mode = mode
        self.n_samples = n_samples
        self.random_state = random_state
        self.cap = cap

    def fit(self, G, y=None):
        g = check_graph(G)
        seed = check_seed(self.random_state, required=self.mode == "sampled")
        est = hyperbolicity_delta(
            all_pairs_distances(g), self.mode, n_samples=self.n_samples, seed=seed, cap=self.cap
        )
        self.delta_ = est.value
        self.is_lower_bound_ = est.is_lower_bound
        self.witness_ = est.witness
        return self


class VolumeGrowth(BaseEstimator, TransformerMixin):
    """Growth profile f(r) = mu(B(o, r)) with h' and the entropy slope.

    ``transform`` maps radii to f(r).
    """

    def __init__(self, basepoint=0, r_min=1, r_max=None):
        self.basepoint = basepoint
        self.r_min = r_min
        self.r_max = r_max

    def fit(self, G, y=None):
        g = check_graph(G)
        o = check_vertex(g, self.basepoint)
        self.profile_ = growth_profile(g, o, r_min=self.r_min, r_max=self.r_max)
        self.entropy_ = self.profile_.entropy
        self.h_prime_ = self.profile_.h_prime
        return self

    def transform(self, X):
        check_is_fitted(self, "profile_")
        return self.profile_.at_many(np.asarray(X, dtype=np.int64))


class PseudoDistance(BaseEstimator, TransformerMixin):
    """d^a_eps for a fixed basepoint; ``transform`` returns rows for source vertices."""

    def __init__(self, basepoint=0, epsilon=None, D=1.0, delta=0.0):
        self.basepoint = basepoint
        self.epsilon = epsilon
        self.D = D
        self.delta = delta

    def fit(self, G, y=None):
        g = check_graph(G)
        D = check_positive("D", self.D)
        delta = check_positive("delta", self.delta, strict=False)
        eps = check_positive("epsilon", self.epsilon, allow_none=True)
        self.params_ = PseudoParams.default(delta, D) if eps is None else PseudoParams(eps, D, delta)
        self.graph_ = g
        self.distances_ = all_pairs_distances(g)
        self.field_ = pseudo_field(g, self.distances_, check_vertex(g, self.basepoint), self.params_)
        return self

    def transform(self, X):
        check_is_fitted(self, "field_")
        return self.field_.rows([check_vertex(self.graph_, x) for x in X])


class TangentBundle(BaseEstimator, TransformerMixin):
    """Discrete tangent bundle; ``transform`` maps (a, x) pairs to vectors ax.

    ``delta`` defaults to the exact four-point constant of the fitted graph.
    """

    def __init__(self, p=2.0, epsilon=None, D=1.0, delta=None, basepoint=0):
        self.p = p
        self.epsilon = epsilon
        self.D = D
        self.delta = delta
        self.basepoint = basepoint

    def fit(self, G, y=None):
        g = check_graph(G)
        d = all_pairs_distances(g)
        delta = self.delta
        if delta is None:
            delta = 0.0 if g.is_tree() else hyperbolicity_delta(d).value
        delta = check_positive("delta", delta, strict=False)
        D = check_positive("D", self.D)
        eps = check_positive("epsilon", self.epsilon, allow_none=True)
        pseudo = PseudoParams.default(delta, D) if eps is None else PseudoParams(eps, D, delta)
        o = check_vertex(g, self.basepoint)
        self.params_ = BundleParams(pseudo, float(self.p), o, growth_profile(g, o, d))
        self.bundle_ = GraphBundle(g, d, self.params_)
        self.delta_ = delta
        return self

    def transform(self, X):
        check_is_fitted(self, "bundle_")
        g = self.bundle_.g
        return np.stack([self.bundle_.tangent_vector(check_vertex(g, a), check_vertex(g, x)).values for a, x in X])

    def curvature(self, C=2.0, **kwargs):
        check_is_fitted(self, "bundle_")
        return verify_curvature(self.bundle_, C, **kwargs)

    def properness_constants(self, C=None):
        check_is_fitted(self, "bundle_")
        return PropernessConstants.from_bundle(self.bundle_, C)
