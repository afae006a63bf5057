"""Tolerances and version strings shared by every module and report."""

TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = "1"

# Relative slack allowed when certifying an analytic inequality.
BOUND_RTOL = 1e-9
# Absolute tolerance for algebraic identities (cocycle identity, affine composition).
IDENTITY_ATOL = 1e-9
# Absolute tolerance for two routes to the same quantity.
AGREEMENT_ATOL = 1e-12
# Triangle inequality slack for computed pseudo-distances.
TRIANGLE_ATOL = 1e-12

# Exact four-point scans are O(n^4); refuse above this many vertices.
DEFAULT_DELTA_CAP = 300

# Default fiber radius for tangent vectors on free-group Cayley trees.
DEFAULT_FIBER_RADIUS = 6
