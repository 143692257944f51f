"""Uniform periodic Cartesian meshes, periodic wrapping and point location."""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import MeshError

ArrayLike = Union[float, np.ndarray]

# Relative geometric tolerance; points this close (times the cell size) to a face snap onto it.
GEOM_TOL = 1e-12


@dataclass(frozen=True)
class Mesh1D:
    """Uniform periodic mesh of ``[x_lo, x_hi]`` with ``n_cells`` cells.

    Cell ``j`` occupies ``[x_lo + j*dx, x_lo + (j+1)*dx]``; cell ``n_cells-1``
    neighbours cell 0.
    """

    x_lo: float
    x_hi: float
    n_cells: int

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def eps(self) -> float:
        return GEOM_TOL * self.dx

    @property
    def faces(self) -> np.ndarray:
        """All ``n_cells + 1`` face coordinates."""
        return self.x_lo + self.dx * np.arange(self.n_cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_lo + self.dx * (np.arange(self.n_cells) + 0.5)

    def to_physical(self, index: ArrayLike, local: ArrayLike) -> ArrayLike:
        """Map (cell index, reference coordinate in [-1, 1]) to a physical coordinate."""
        return self.x_lo + self.dx * (np.asarray(index) + 0.5 * (np.asarray(local) + 1.0))

    def wrap(self, x: ArrayLike) -> ArrayLike:
        """Vectorised periodic wrap into ``[x_lo, x_hi)``."""
        wrapped = self.x_lo + np.mod(np.asarray(x, dtype=float) - self.x_lo, self.length)
        # np.mod can round up to exactly the period for tiny negative offsets
        wrapped = np.where(wrapped >= self.x_hi, self.x_lo, wrapped)
        return wrapped if np.ndim(wrapped) else float(wrapped)

    def unwrapped_index(self, x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Cell position of unwrapped coordinates, in cell units, with face snapping.

        Returns:
            (index, local): integer cell index (not wrapped) and reference coordinate.
            A point on a face belongs to the cell on its right (local coordinate -1).
        """
        t = (np.asarray(x, dtype=float) - self.x_lo) / self.dx
        nearest = np.rint(t)
        t = np.where(np.abs(t - nearest) <= GEOM_TOL * np.maximum(1.0, np.abs(nearest)), nearest, t)
        index = np.floor(t)
        local = 2.0 * (t - index) - 1.0
        return index.astype(np.int64), local

    def locate(self, x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorised point location: wrapped cell index and reference coordinate."""
        index, local = self.unwrapped_index(x)
        return np.mod(index, self.n_cells), local


@dataclass(frozen=True)
class Mesh2D:
    """Tensor product of two periodic 1D meshes."""

    mesh_x: Mesh1D
    mesh_y: Mesh1D

    @property
    def nx(self) -> int:
        return self.mesh_x.n_cells

    @property
    def ny(self) -> int:
        return self.mesh_y.n_cells

    @property
    def dx(self) -> float:
        return self.mesh_x.dx

    @property
    def dy(self) -> float:
        return self.mesh_y.dx

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def area(self) -> float:
        return self.mesh_x.length * self.mesh_y.length

    @property
    def eps(self) -> float:
        return GEOM_TOL * max(self.dx, self.dy)

    @property
    def domain(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return (self.mesh_x.x_lo, self.mesh_x.x_hi), (self.mesh_y.x_lo, self.mesh_y.x_hi)

    def locate(self, x: ArrayLike, y: ArrayLike) -> Tuple[np.ndarray, ...]:
        """Vectorised point location: ``(ix, iy, xi, eta)``."""
        ix, xi = self.mesh_x.locate(x)
        iy, eta = self.mesh_y.locate(y)
        return ix, iy, xi, eta


@dataclass(frozen=True)
class CellLocation:
    """Periodic-wrapped cell index plus reference coordinates in [-1, 1]."""

    index: Tuple[int, ...]
    local: Tuple[float, ...]


def build_mesh_1d(domain: Tuple[float, float], n: int) -> Mesh1D:
    """Build a uniform periodic mesh of ``domain`` with ``n`` cells.

    Raises:
        MeshError: If ``n < 1`` or the interval is empty or inverted.
    """
    x_lo, x_hi = float(domain[0]), float(domain[1])
    if int(n) != n or n < 1:
        raise MeshError(f"Number of cells must be a positive integer, got {n}")
    if not np.isfinite(x_lo) or not np.isfinite(x_hi) or not x_lo < x_hi:
        raise MeshError(f"Domain must satisfy x_lo < x_hi, got [{x_lo}, {x_hi}]")
    return Mesh1D(x_lo=x_lo, x_hi=x_hi, n_cells=int(n))


def build_mesh_2d(
    domain_x: Tuple[float, float], domain_y: Tuple[float, float], nx: int, ny: int
) -> Mesh2D:
    """Build the tensor-product mesh of two uniform periodic 1D meshes."""
    return Mesh2D(mesh_x=build_mesh_1d(domain_x, nx), mesh_y=build_mesh_1d(domain_y, ny))


def wrap_periodic(x: ArrayLike, mesh: Mesh1D) -> ArrayLike:
    """Wrap ``x`` into ``[x_lo, x_hi)``."""
    return mesh.wrap(x)


def locate_cell(x: float, mesh: Union[Mesh1D, Mesh2D], y: float = None) -> CellLocation:
    """Locate the cell containing ``x`` (and ``y`` for a 2D mesh).

    Points within the geometric tolerance of a face are snapped to it and then
    assigned to the cell on the right of the face.
    """
    if isinstance(mesh, Mesh2D):
        if y is None:
            raise ValueError("A 2D mesh needs both x and y")
        ix, iy, xi, eta = mesh.locate(x, y)
        return CellLocation(index=(int(ix), int(iy)), local=(float(xi), float(eta)))
    index, local = mesh.locate(x)
    return CellLocation(index=(int(index),), local=(float(local),))
