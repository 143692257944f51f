"""Modal Legendre bases, L2 projection and exact product integrals.

Coefficient layout (also the snapshot file contract):

* 1D degree k: mode m is P_m(xi), m = 0..k.
* Q^k: mode index ``a * (k + 1) + b`` holds P_a(xi) P_b(eta).
* P^k: graded by total degree, x-degree descending inside a degree:
  (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...

Mode 0 is always the cell average.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import legendre

from ..mesh import Mesh1D, Mesh2D
from .quadrature import gauss_legendre

SPACE_1D = "1D"
SPACE_P = "P"
SPACE_Q = "Q"
SPACES_2D = (SPACE_P, SPACE_Q)

Interval = Tuple[float, float]
Rectangle = Tuple[Interval, Interval]


def legendre_values(k: int, xi: np.ndarray) -> np.ndarray:
    """``P_0..P_k`` at ``xi``; shape ``xi.shape + (k + 1,)``."""
    return legendre.legvander(np.asarray(xi, dtype=float), k)


def legendre_derivatives(k: int, xi: np.ndarray) -> np.ndarray:
    """``P_0'..P_k'`` at ``xi``; shape ``xi.shape + (k + 1,)``."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape + (k + 1,))
    for m in range(1, k + 1):
        c = np.zeros(m + 1)
        c[m] = 1.0
        out[..., m] = legendre.legval(xi, legendre.legder(c))
    return out


def mode_indices(k: int, space: str) -> Tuple[Tuple[int, int], ...]:
    """(x-degree, y-degree) of every mode, in storage order."""
    if space == SPACE_Q:
        return tuple((a, b) for a in range(k + 1) for b in range(k + 1))
    if space == SPACE_P:
        return tuple((a, d - a) for d in range(k + 1) for a in range(d, -1, -1))
    raise ValueError(f"Unknown 2D space tag: {space!r}")


def n_modes(k: int, space: str) -> int:
    if space == SPACE_1D:
        return k + 1
    if space == SPACE_Q:
        return (k + 1) ** 2
    if space == SPACE_P:
        return (k + 1) * (k + 2) // 2
    raise ValueError(f"Unknown space tag: {space!r}")


@dataclass(frozen=True)
class Basis1D:
    """Legendre basis of degree k on [-1, 1]."""

    k: int

    @property
    def size(self) -> int:
        return self.k + 1

    @cached_property
    def mass_ref(self) -> np.ndarray:
        """Diagonal of the reference mass matrix, 2 / (2m + 1)."""
        return 2.0 / (2.0 * np.arange(self.k + 1) + 1.0)

    def values(self, xi: np.ndarray) -> np.ndarray:
        return legendre_values(self.k, xi)


@dataclass(frozen=True)
class Basis2D:
    """Legendre product basis on [-1, 1]^2 spanning P^k or Q^k."""

    k: int
    space: str

    @property
    def size(self) -> int:
        return n_modes(self.k, self.space)

    @cached_property
    def modes(self) -> Tuple[Tuple[int, int], ...]:
        return mode_indices(self.k, self.space)

    @cached_property
    def degrees_x(self) -> np.ndarray:
        return np.array([a for a, _ in self.modes])

    @cached_property
    def degrees_y(self) -> np.ndarray:
        return np.array([b for _, b in self.modes])

    @cached_property
    def mass_ref(self) -> np.ndarray:
        """Diagonal of the reference mass matrix, 4 / ((2a + 1)(2b + 1))."""
        return 4.0 / ((2.0 * self.degrees_x + 1.0) * (2.0 * self.degrees_y + 1.0))

    def index(self, a: int, b: int) -> int:
        return self.modes.index((a, b))

    def values(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """All basis functions at the points; shape ``broadcast(xi, eta).shape + (size,)``."""
        xi, eta = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))
        px = legendre_values(self.k, xi)
        py = legendre_values(self.k, eta)
        return px[..., self.degrees_x] * py[..., self.degrees_y]


@lru_cache(maxsize=None)
def get_basis(k: int, space: str) -> Union[Basis1D, Basis2D]:
    """Shared basis instance for a degree and space tag."""
    if space == SPACE_1D:
        return Basis1D(k)
    return Basis2D(k, space)


@dataclass(frozen=True, eq=False)
class ModalPoly1D:
    """Degree-k polynomial on one cell, stored as Legendre coefficients."""

    k: int
    coeffs: np.ndarray

    @property
    def average(self) -> float:
        return float(self.coeffs[0])

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return legendre_values(self.k, xi) @ self.coeffs


@dataclass(frozen=True, eq=False)
class ModalPoly2D:
    """P^k or Q^k polynomial on one cell, stored as Legendre product coefficients."""

    k: int
    space: str
    coeffs: np.ndarray

    @property
    def basis(self) -> Basis2D:
        return get_basis(self.k, self.space)

    @property
    def average(self) -> float:
        return float(self.coeffs[0])

    def __call__(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return self.basis.values(xi, eta) @ self.coeffs


ModalPoly = Union[ModalPoly1D, ModalPoly2D]


def l2_project(
    f: Callable[..., np.ndarray],
    cell: Union[Interval, Rectangle],
    k: int,
    space: str = SPACE_1D,
) -> ModalPoly:
    """L2-project ``f`` (physical coordinates) onto the polynomial space of one cell.

    Args:
        f: Vectorised function ``f(x)`` (1D) or ``f(x, y)`` (2D).
        cell: ``(x0, x1)`` or ``((x0, x1), (y0, y1))``.
        k: Polynomial degree.
        space: ``"1D"``, ``"P"`` or ``"Q"``.

    Returns:
        ModalPoly1D or ModalPoly2D with coefficients computed by (k + 3)-point
        Gauss quadrature per direction.
    """
    rule = gauss_legendre(k + 3)
    if space == SPACE_1D:
        (x0, x1) = cell
        x = x0 + 0.5 * (x1 - x0) * (rule.nodes + 1.0)
        basis = get_basis(k, SPACE_1D)
        vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
        coeffs = (rule.weights * vals) @ basis.values(rule.nodes) / basis.mass_ref
        return ModalPoly1D(k=k, coeffs=coeffs)

    (x0, x1), (y0, y1) = cell
    xi, eta = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    w = np.outer(rule.weights, rule.weights)
    x = x0 + 0.5 * (x1 - x0) * (xi + 1.0)
    y = y0 + 0.5 * (y1 - y0) * (eta + 1.0)
    basis = get_basis(k, space)
    vals = np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape)
    coeffs = np.einsum("pq,pq,pqm->m", w, vals, basis.values(xi, eta)) / basis.mass_ref
    return ModalPoly2D(k=k, space=space, coeffs=coeffs)


def evaluate(p: ModalPoly, point: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    """Value of a cell polynomial at reference coordinates.

    ``point`` is ``xi`` for 1D polynomials and ``(xi, eta)`` for 2D ones; arrays
    are evaluated pointwise.
    """
    if isinstance(p, ModalPoly1D):
        return p(point)
    xi, eta = point
    return p(xi, eta)


def integrate_product(
    p_a: ModalPoly, p_b: ModalPoly, region: Union[Interval, Rectangle, None] = None
) -> float:
    """Exact integral of ``p_a * p_b`` over a sub-region of the reference element.

    The integral is taken in reference coordinates. ``region`` defaults to the
    whole element; empty or inverted regions give 0.
    """
    n = max(p_a.k, p_b.k) + 1
    rule = gauss_legendre(n)
    if isinstance(p_a, ModalPoly1D):
        (a, b) = region if region is not None else (-1.0, 1.0)
        if not b > a:
            return 0.0
        x, w = rule.mapped(a, b)
        return float(np.dot(w, p_a(x) * p_b(x)))

    ((a, b), (c, d)) = region if region is not None else ((-1.0, 1.0), (-1.0, 1.0))
    if not (b > a and d > c):
        return 0.0
    x, wx = rule.mapped(a, b)
    y, wy = rule.mapped(c, d)
    xi, eta = np.meshgrid(x, y, indexing="ij")
    return float(np.sum(np.outer(wx, wy) * p_a(xi, eta) * p_b(xi, eta)))


def project_solution_1d(f: Callable[[np.ndarray], np.ndarray], mesh: Mesh1D, k: int) -> np.ndarray:
    """Cellwise L2 projection of ``f`` over a whole 1D mesh; shape ``(n, k + 1)``."""
    rule = gauss_legendre(k + 3)
    x = mesh.faces[:-1, None] + 0.5 * mesh.dx * (rule.nodes[None, :] + 1.0)
    basis = get_basis(k, SPACE_1D)
    vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return np.einsum("q,jq,qm->jm", rule.weights, vals, basis.values(rule.nodes)) / basis.mass_ref


def project_solution_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray], mesh: Mesh2D, k: int, space: str
) -> np.ndarray:
    """Cellwise L2 projection of ``f(x, y)`` over a 2D mesh; shape ``(nx, ny, n_modes)``."""
    rule = gauss_legendre(k + 3)
    nq = rule.size
    xi, eta = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    w = np.outer(rule.weights, rule.weights)
    xc = mesh.mesh_x.faces[:-1] + 0.5 * mesh.dx
    yc = mesh.mesh_y.faces[:-1] + 0.5 * mesh.dy
    x = xc[:, None, None, None] + 0.5 * mesh.dx * xi[None, None, :, :]
    y = yc[None, :, None, None] + 0.5 * mesh.dy * eta[None, None, :, :]
    x, y = np.broadcast_arrays(x, y)
    vals = np.broadcast_to(np.asarray(f(x, y), dtype=float), (mesh.nx, mesh.ny, nq, nq))
    basis = get_basis(k, space)
    phi = basis.values(xi, eta)
    return np.einsum("pq,ijpq,pqm->ijm", w, vals, phi) / basis.mass_ref


def lift_degree(
    coeffs: np.ndarray, basis_from: Union[Basis1D, Basis2D], basis_to: Union[Basis1D, Basis2D]
) -> np.ndarray:
    """L2 projection between nested Legendre spaces (truncation or zero padding).

    Works on the last axis of ``coeffs``; modes absent from the source are zero
    and modes absent from the target are dropped.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros(coeffs.shape[:-1] + (basis_to.size,))
    if isinstance(basis_from, Basis1D):
        m = min(basis_from.size, basis_to.size)
        out[..., :m] = coeffs[..., :m]
        return out
    source = {mode: i for i, mode in enumerate(basis_from.modes)}
    for j, mode in enumerate(basis_to.modes):
        i = source.get(mode)
        if i is not None:
            out[..., j] = coeffs[..., i]
    return out
