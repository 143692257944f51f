"""Semi-Lagrangian discontinuous Galerkin transport solvers and benchmarks."""

from .errors import SLDGError
from .mesh import Mesh1D, Mesh2D, build_mesh_1d, build_mesh_2d
from .solution import Solution1D, Solution2D, evaluate_solution

__version__ = "0.1.0"

__all__ = [
    "Mesh1D",
    "Mesh2D",
    "SLDGError",
    "Solution1D",
    "Solution2D",
    "build_mesh_1d",
    "build_mesh_2d",
    "evaluate_solution",
]
