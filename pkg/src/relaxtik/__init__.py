"""Denoising of sphere- and SO(3)-valued graph signals.

The noisy signal lives on the vertices of a connected graph and takes values
on the unit sphere S^{d-1} (d = 2, 3, 4) or, via unit quaternions, in SO(3).
A quadratic smoothness penalty on adjacent values is relaxed into a convex
program whose constraints are small per-edge positive semidefinite blocks,
and the relaxation is solved with ADMM.
"""

from relaxtik.graph import Graph, Weights, line_graph, grid_graph, degree_table
from relaxtik.admm import SolverConfig, DenoiseResult, admm_solve

__all__ = [
    "Graph",
    "Weights",
    "line_graph",
    "grid_graph",
    "degree_table",
    "SolverConfig",
    "DenoiseResult",
    "admm_solve",
]

__version__ = "0.1.0"
