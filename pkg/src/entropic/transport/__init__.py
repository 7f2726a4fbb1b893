"""Brenier maps and conjugate measures (1D exact path, 2D semi-discrete path)."""

from .one_dim import (
    Grid1DMap,
    MonotoneGraph,
    as_graph,
    brenier_map_1d,
    cdf_1d,
    cell_average_density,
    circle_shift,
    conjugate_map_graph,
    conjugate_measure_1d,
    density_reciprocity_check,
    pushforward_1d,
    right_inverse_1d,
    rotate,
)
from .semidiscrete import (
    GridMap,
    LaguerreMap,
    Tessellation,
    brenier_map_discrete,
    cell_mass,
    conjugate_map_2d,
    conjugate_measure_2d,
    laguerre_cells,
    legendre_vertices,
    semidiscrete_weights,
)

__all__ = [
    "Grid1DMap", "MonotoneGraph", "as_graph", "brenier_map_1d", "cdf_1d", "cell_average_density",
    "circle_shift", "conjugate_map_graph", "conjugate_measure_1d", "density_reciprocity_check",
    "pushforward_1d", "right_inverse_1d", "rotate",
    "GridMap", "LaguerreMap", "Tessellation", "brenier_map_discrete", "cell_mass",
    "conjugate_map_2d", "conjugate_measure_2d", "laguerre_cells", "legendre_vertices",
    "semidiscrete_weights",
]
