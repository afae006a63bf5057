"""Tangent bundles of hyperbolic graphs and proper affine cocycles on L^p, checked numerically."""
from .config import SCHEMA_VERSION, TOOL_VERSION
from .exceptions import TangentLpError
from .graph import MetricGraph, cycle_graph, from_edge_list, path_graph, read_graph, random_tree
from .metric import all_pairs_distances, growth_profile, hyperbolicity_delta, non_collapsing, p_threshold
from .pseudometric import PseudoParams, pseudo_field, verify_bounds
from .bundle import BundleParams, GraphBundle, PropernessConstants, verify_curvature, verify_properness
from .action import FreeGroupAction, PermutationAction, TreeFrame, GraphFrame, cocycle, cocycle_norm
from .estimators import HyperbolicityEstimator, PseudoDistance, TangentBundle, VolumeGrowth

__version__ = TOOL_VERSION

__all__ = [
    "SCHEMA_VERSION",
    "TOOL_VERSION",
    "TangentLpError",
    "MetricGraph",
    "cycle_graph",
    "from_edge_list",
    "path_graph",
    "read_graph",
    "random_tree",
    "all_pairs_distances",
    "growth_profile",
    "hyperbolicity_delta",
    "non_collapsing",
    "p_threshold",
    "PseudoParams",
    "pseudo_field",
    "verify_bounds",
    "BundleParams",
    "GraphBundle",
    "PropernessConstants",
    "verify_curvature",
    "verify_properness",
    "FreeGroupAction",
    "PermutationAction",
    "TreeFrame",
    "GraphFrame",
    "cocycle",
    "cocycle_norm",
    "HyperbolicityEstimator",
    "PseudoDistance",
    "TangentBundle",
    "VolumeGrowth",
]
