"""Discrete Schwarz rearrangement on the integer lattice Z^d."""

__version__ = "0.1.0"

from .lattice import (  # noqa: E402
    Direction,
    ShapeClass,
    SparseFunction,
    ValueMultiset,
    box_ball,
    canonical_shape,
    cutoff,
    diamond_ball,
    direction_set,
    graph_distance,
    line_of,
    values_multiset,
)
from .rearrange import (  # noqa: E402
    ConvergenceError,
    HalfLine,
    LineFunction,
    is_schwarz_symmetric,
    one_step,
    polarize,
    rearrange_line,
    schwarz_rearrange,
    schwarz_rearrange_alt_order,
    support_sandwich_bounds,
    two_point_T,
)

__all__ = [
    "ConvergenceError", "Direction", "HalfLine", "LineFunction", "ShapeClass", "SparseFunction",
    "ValueMultiset", "__version__", "box_ball", "canonical_shape", "cutoff", "diamond_ball",
    "direction_set", "graph_distance", "is_schwarz_symmetric", "line_of", "one_step", "polarize",
    "rearrange_line", "schwarz_rearrange", "schwarz_rearrange_alt_order",
    "support_sandwich_bounds", "two_point_T", "values_multiset",
]
