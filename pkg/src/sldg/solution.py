"""Piecewise-polynomial grid solutions (one modal polynomial per cell)."""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .basis.modal import (
    SPACE_1D,
    SPACES_2D,
    ModalPoly1D,
    ModalPoly2D,
    get_basis,
    n_modes,
    project_solution_1d,
    project_solution_2d,
)
from .mesh import Mesh1D, Mesh2D


@dataclass(frozen=True, eq=False)
class Solution1D:
    """Degree-k DG function on a periodic 1D mesh; ``coeffs`` has shape ``(n, k + 1)``."""

    mesh: Mesh1D
    k: int
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        expected = (self.mesh.n_cells, self.k + 1)
        if np.shape(self.coeffs) != expected:
            raise ValueError(f"coeffs must have shape {expected}, got {np.shape(self.coeffs)}")

    @classmethod
    def project(
        cls, f: Callable[[np.ndarray], np.ndarray], mesh: Mesh1D, k: int, time: float = 0.0
    ) -> "Solution1D":
        return cls(mesh=mesh, k=k, coeffs=project_solution_1d(f, mesh, k), time=time)

    def cell(self, j: int) -> ModalPoly1D:
        return ModalPoly1D(k=self.k, coeffs=self.coeffs[j % self.mesh.n_cells])

    @property
    def cell_averages(self) -> np.ndarray:
        return self.coeffs[:, 0]

    @property
    def mass(self) -> float:
        return float(np.sum(self.coeffs[:, 0]) * self.mesh.dx)

    @property
    def l2_norm(self) -> float:
        mass_ref = get_basis(self.k, SPACE_1D).mass_ref
        return float(np.sqrt(np.sum(self.coeffs**2 * mass_ref) * 0.5 * self.mesh.dx))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Point values at physical coordinates (periodically wrapped)."""
        index, local = self.mesh.locate(x)
        phi = get_basis(self.k, SPACE_1D).values(local)
        return np.einsum("...m,...m->...", phi, self.coeffs[index])

    def with_coeffs(self, coeffs: np.ndarray, time: Optional[float] = None) -> "Solution1D":
        return replace(self, coeffs=coeffs, time=self.time if time is None else time)


@dataclass(frozen=True, eq=False)
class Solution2D:
    """P^k or Q^k DG function on a periodic 2D mesh; ``coeffs`` is ``(nx, ny, n_modes)``.

    Splitting drivers work on ``space="Q"`` solutions, non-splitting ones on
    ``space="P"``.
    """

    mesh: Mesh2D
    k: int
    space: str
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.space not in SPACES_2D:
            raise ValueError(f"space must be one of {SPACES_2D}, got {self.space!r}")
        expected = (self.mesh.nx, self.mesh.ny, n_modes(self.k, self.space))
        if np.shape(self.coeffs) != expected:
            raise ValueError(f"coeffs must have shape {expected}, got {np.shape(self.coeffs)}")

    @classmethod
    def project(
        cls,
        f: Callable[[np.ndarray, np.ndarray], np.ndarray],
        mesh: Mesh2D,
        k: int,
        space: str,
        time: float = 0.0,
    ) -> "Solution2D":
        return cls(
            mesh=mesh, k=k, space=space, coeffs=project_solution_2d(f, mesh, k, space), time=time
        )

    @property
    def basis(self):
        return get_basis(self.k, self.space)

    def cell(self, ix: int, iy: int) -> ModalPoly2D:
        return ModalPoly2D(
            k=self.k, space=self.space, coeffs=self.coeffs[ix % self.mesh.nx, iy % self.mesh.ny]
        )

    @property
    def cell_averages(self) -> np.ndarray:
        return self.coeffs[..., 0]

    @property
    def mass(self) -> float:
        return float(np.sum(self.coeffs[..., 0]) * self.mesh.cell_area)

    @property
    def l2_norm(self) -> float:
        return float(
            np.sqrt(np.sum(self.coeffs**2 * self.basis.mass_ref) * 0.25 * self.mesh.cell_area)
        )

    def tensor_coeffs(self) -> np.ndarray:
        """Q^k coefficients as ``(nx, ny, k + 1, k + 1)`` indexed by (x-degree, y-degree)."""
        if self.space != "Q":
            raise ValueError("tensor view is only defined for Q^k solutions")
        return self.coeffs.reshape(self.mesh.nx, self.mesh.ny, self.k + 1, self.k + 1)

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Point values at physical coordinates (periodically wrapped)."""
        ix, iy, xi, eta = self.mesh.locate(x, y)
        phi = self.basis.values(xi, eta)
        return np.einsum("...m,...m->...", phi, self.coeffs[ix, iy])

    def with_coeffs(self, coeffs: np.ndarray, time: Optional[float] = None) -> "Solution2D":
        return replace(self, coeffs=coeffs, time=self.time if time is None else time)


def evaluate_solution(solution, x: np.ndarray, y: Optional[np.ndarray] = None) -> np.ndarray:
    """Vectorised point evaluation of a 1D or 2D grid solution."""
    if isinstance(solution, Solution1D):
        return solution.evaluate(x)
    return solution.evaluate(x, y)
