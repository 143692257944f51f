"""Periodic LDG Poisson solvers for the field equations of the nonlinear models.

Both solvers discretise -Δφ = s in mixed form, q = ∇φ and -div q = s, with
alternating fluxes: φ is taken from the left/bottom trace and q from the
right/top trace. The constant nullspace is removed with one Lagrange
multiplier on the cell means of φ. Operators are assembled with scipy.sparse
and LU-factorised once per (mesh, degree, space).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from utils.logger import get_logger

from .basis.modal import SPACE_1D, SPACE_P, SPACE_Q, get_basis, lift_degree
from .basis.quadrature import gauss_lobatto
from .errors import PoissonCompatibilityError, SolverError
from .mesh import Mesh1D, Mesh2D
from .solution import Solution1D, Solution2D

log = get_logger(__name__)

COMPATIBILITY_TOL = 1e-10
RESIDUAL_TOL = 1e-12
SOLVER_CACHE_SIZE = 8

SIGN_EULER = "euler"
SIGN_GUIDING = "guiding"
SIGNS = (SIGN_EULER, SIGN_GUIDING)


def _reference_blocks(r: int) -> Dict[str, np.ndarray]:
    """Per-cell LDG blocks on [-1, 1] for the 1D operator in one direction.

    With D[a, m] = int P_a P_m' and pm1[m] = (-1)^m:
    ``G_self``/``G_left`` give the weak gradient (φ from the left trace) and
    ``H_self``/``H_right`` the weak negative divergence (q from the right trace).
    """
    n = r + 1
    pm1 = (-1.0) ** np.arange(n)
    ones = np.ones(n)
    D = np.zeros((n, n))
    for a in range(n):
        for m in range(n):
            # int_{-1}^{1} P_a P_m' is 2 when m > a and m + a is odd, else 0.
            D[a, m] = 2.0 if (m > a and (m + a) % 2 == 1) else 0.0
    return {
        "G_self": -D.T + np.outer(ones, ones),
        "G_left": -np.outer(pm1, ones),
        "H_self": D.T + np.outer(pm1, pm1),
        "H_right": -np.outer(ones, pm1),
        "mass": 2.0 / (2.0 * np.arange(n) + 1.0),
    }


def _periodic_shift(n: int, offset: int) -> sp.csr_matrix:
    """(S v)_j = v_{j + offset} with periodic indices."""
    rows = np.arange(n)
    return sp.csr_matrix((np.ones(n), (rows, (rows + offset) % n)), shape=(n, n))


def _direction_operators(mesh: Mesh1D, r: int) -> Tuple[sp.csr_matrix, ...]:
    """Global (G, H, M) for one direction, cell-major ordering (cell, mode)."""
    blocks = _reference_blocks(r)
    n = mesh.n_cells
    eye = sp.identity(n, format="csr")
    G = sp.kron(eye, blocks["G_self"]) + sp.kron(_periodic_shift(n, -1), blocks["G_left"])
    H = sp.kron(eye, blocks["H_self"]) + sp.kron(_periodic_shift(n, 1), blocks["H_right"])
    M = sp.kron(eye, sp.diags(0.5 * mesh.dx * blocks["mass"]))
    return G.tocsr(), H.tocsr(), M.tocsr()


def _factorise(A: sp.spmatrix, constraint: np.ndarray):
    """LU factors of the operator bordered by the mean-zero constraint."""
    c = sp.csr_matrix(constraint.reshape(-1, 1))
    bordered = sp.bmat([[A, c], [c.T, None]], format="csr")
    try:
        return splu(bordered.tocsc()), bordered
    except RuntimeError as e:
        raise SolverError(f"LDG Poisson operator could not be factorised: {e}") from e


def relative_residual(bordered: sp.spmatrix, x: np.ndarray, b: np.ndarray) -> float:
    """Normwise backward error ||Ax - b|| / (||A|| ||x|| + ||b||) in the max norm."""
    a_norm = float(abs(bordered).sum(axis=1).max())
    scale = a_norm * np.max(np.abs(x)) + np.max(np.abs(b))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(bordered @ x - b)) / scale)


def _solve(lu, bordered: sp.spmatrix, rhs: np.ndarray) -> Tuple[np.ndarray, float]:
    b = np.append(rhs, 0.0)
    x = lu.solve(b)
    # one step of iterative refinement
    x = x + lu.solve(b - bordered @ x)
    residual = relative_residual(bordered, x, b)
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise SolverError(f"LDG Poisson solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}")
    log.debug(f"Poisson solve residual {residual:.3e}, multiplier {x[-1]:.3e}")
    return x[:-1], residual


def _remove_mean(values: np.ndarray, mean: float, what: str) -> np.ndarray:
    if abs(mean) > COMPATIBILITY_TOL:
        raise PoissonCompatibilityError(
            f"{what} has mean {mean:.3e}; periodic Poisson needs a zero-mean source"
        )
    out = values.copy()
    out[..., 0] -= mean
    return out


# ======================================================================
# 1D
# ======================================================================


@dataclass(frozen=True, eq=False)
class FieldSolution1D:
    """Potential φ (zero mean) and field E = -φ_x as degree-r DG functions."""

    phi: Solution1D
    efield: Solution1D
    residual: float = 0.0

    @property
    def r(self) -> int:
        return self.phi.k

    def electric_field(self, x: np.ndarray) -> np.ndarray:
        return self.efield.evaluate(x)

    @property
    def energy(self) -> float:
        """int E^2 dx."""
        return self.efield.l2_norm**2


class PoissonSolver1D:
    """Factorised LDG operator for -φ'' = ρ on a periodic 1D mesh."""

    def __init__(self, mesh: Mesh1D, r: int):
        if r < 0:
            raise ValueError(f"Poisson degree must be >= 0, got {r}")
        self.mesh = mesh
        self.r = r
        G, H, M = _direction_operators(mesh, r)
        m_inv = sp.diags(1.0 / M.diagonal())
        self._gradient = (m_inv @ G).tocsr()
        self._mass = M
        constraint = np.zeros(mesh.n_cells * (r + 1))
        constraint[:: r + 1] = 1.0
        self._lu, self._bordered = _factorise((H @ self._gradient).tocsr(), constraint)
        log.debug(f"Factorised 1D LDG Poisson operator, {mesh.n_cells} cells, degree {r}")

    def solve(self, rho: Solution1D) -> FieldSolution1D:
        """Solve with a zero-mean source (projected to degree r by truncation/padding).

        Raises:
            PoissonCompatibilityError: If |mean(ρ)| > 1e-10.
            SolverError: If the linear solve fails.
        """
        coeffs = lift_degree(rho.coeffs, get_basis(rho.k, SPACE_1D), get_basis(self.r, SPACE_1D))
        coeffs = _remove_mean(coeffs, float(np.mean(coeffs[:, 0])), "Charge density")
        phi, residual = _solve(self._lu, self._bordered, self._mass @ coeffs.reshape(-1))
        q = self._gradient @ phi
        shape = (self.mesh.n_cells, self.r + 1)
        return FieldSolution1D(
            phi=Solution1D(mesh=self.mesh, k=self.r, coeffs=phi.reshape(shape), time=rho.time),
            efield=Solution1D(mesh=self.mesh, k=self.r, coeffs=-q.reshape(shape), time=rho.time),
            residual=residual,
        )


# ======================================================================
# 2D
# ======================================================================


@dataclass(frozen=True, eq=False)
class FieldSolution2D:
    """Stream function / potential Φ and velocity (-Φ_y, Φ_x) as degree-r DG functions."""

    phi: Solution2D
    velocity_x: Solution2D
    velocity_y: Solution2D
    residual: float = 0.0

    @property
    def r(self) -> int:
        return self.phi.k

    def velocity(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.velocity_x.evaluate(x, y), self.velocity_y.evaluate(x, y)

    @property
    def max_speed(self) -> Tuple[float, float]:
        """Largest |u| and |v| over the per-cell tensor Gauss-Lobatto points (r + 2 per direction)."""
        nodes = gauss_lobatto(self.r + 2).nodes
        xi, eta = np.meshgrid(nodes, nodes, indexing="ij")
        phi = self.phi.basis.values(xi.ravel(), eta.ravel())
        u = np.einsum("pm,ijm->ijp", phi, self.velocity_x.coeffs)
        v = np.einsum("pm,ijm->ijp", phi, self.velocity_y.coeffs)
        return float(np.max(np.abs(u))), float(np.max(np.abs(v)))

    @property
    def kinetic_energy(self) -> float:
        """int |u|^2 dx dy."""
        return self.velocity_x.l2_norm**2 + self.velocity_y.l2_norm**2


class PoissonSolver2D:
    """Factorised LDG operator for -ΔΦ = s on a periodic Cartesian mesh in P^r or Q^r.

    Unknowns are ordered (ix, a, iy, b) so the operator is a sum of Kronecker
    products of the 1D blocks; P^r keeps the rows and columns with a + b <= r.
    """

    def __init__(self, mesh: Mesh2D, r: int, space: str = SPACE_P):
        if space not in (SPACE_P, SPACE_Q):
            raise ValueError(f"space must be 'P' or 'Q', got {space!r}")
        if r < 0:
            raise ValueError(f"Poisson degree must be >= 0, got {r}")
        self.mesh = mesh
        self.r = r
        self.space = space
        n = r + 1
        Gx, Hx, Mx = _direction_operators(mesh.mesh_x, r)
        Gy, Hy, My = _direction_operators(mesh.mesh_y, r)

        ix, a, iy, b = np.meshgrid(
            np.arange(mesh.nx), np.arange(n), np.arange(mesh.ny), np.arange(n), indexing="ij"
        )
        keep = np.ones(ix.shape, dtype=bool) if space == SPACE_Q else (a + b <= r)
        keep = keep.ravel()
        self._full = keep.size
        self._kept = np.flatnonzero(keep)
        R = sp.csr_matrix(
            (np.ones(len(self._kept)), (np.arange(len(self._kept)), self._kept)),
            shape=(len(self._kept), keep.size),
        )
        restrict = lambda op: (R @ op @ R.T).tocsr()

        mass = restrict(sp.kron(Mx, My))
        m_inv = sp.diags(1.0 / mass.diagonal())
        self._grad_x = (m_inv @ restrict(sp.kron(Gx, My))).tocsr()
        self._grad_y = (m_inv @ restrict(sp.kron(Mx, Gy))).tocsr()
        A = restrict(sp.kron(Hx, My)) @ self._grad_x + restrict(sp.kron(Mx, Hy)) @ self._grad_y
        self._mass = mass

        # Local (ix, iy, a, b) position of every kept unknown.
        self._cell = (ix.ravel()[self._kept], iy.ravel()[self._kept])
        basis = get_basis(r, space)
        self._mode = np.array(
            [basis.index(int(p), int(q)) for p, q in zip(a.ravel()[self._kept], b.ravel()[self._kept])]
        )
        constraint = ((a.ravel() == 0) & (b.ravel() == 0))[self._kept].astype(float)
        self._lu, self._bordered = _factorise(A.tocsr(), constraint)
        log.debug(
            f"Factorised 2D LDG Poisson operator, {mesh.nx}x{mesh.ny} cells, {space}^{r}, "
            f"{len(self._kept)} unknowns"
        )

    def _to_vector(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs[self._cell[0], self._cell[1], self._mode]

    def _to_solution(self, vector: np.ndarray, time: float) -> Solution2D:
        basis = get_basis(self.r, self.space)
        coeffs = np.zeros((self.mesh.nx, self.mesh.ny, basis.size))
        coeffs[self._cell[0], self._cell[1], self._mode] = vector
        return Solution2D(mesh=self.mesh, k=self.r, space=self.space, coeffs=coeffs, time=time)

    def solve(self, source: Solution2D, sign: str = SIGN_GUIDING) -> FieldSolution2D:
        """Solve ΔΦ = ω (``euler``) or -ΔΦ = ρ (``guiding``); velocity is (-Φ_y, Φ_x).

        The source is L2-projected onto this solver's space and degree.

        Raises:
            PoissonCompatibilityError: If the source mean exceeds 1e-10 in magnitude.
            SolverError: If the linear solve fails.
        """
        if sign not in SIGNS:
            raise ValueError(f"sign must be one of {SIGNS}, got {sign!r}")
        coeffs = lift_degree(
            source.coeffs, get_basis(source.k, source.space), get_basis(self.r, self.space)
        )
        coeffs = _remove_mean(coeffs, float(np.mean(coeffs[..., 0])), "Poisson source")
        if sign == SIGN_EULER:
            coeffs = -coeffs
        phi, residual = _solve(self._lu, self._bordered, self._mass @ self._to_vector(coeffs))
        phi_x = self._grad_x @ phi
        phi_y = self._grad_y @ phi
        t = source.time
        return FieldSolution2D(
            phi=self._to_solution(phi, t),
            velocity_x=self._to_solution(-phi_y, t),
            velocity_y=self._to_solution(phi_x, t),
            residual=residual,
        )


@lru_cache(maxsize=SOLVER_CACHE_SIZE)
def get_solver(mesh, r: int, space: Optional[str] = None):
    """Cached solver for (mesh, r, space); ``space=None`` selects the 1D solver.

    Only the SOLVER_CACHE_SIZE most recently used factorisations are kept.
    """
    if space is None:
        return PoissonSolver1D(mesh, r)
    return PoissonSolver2D(mesh, r, space)


def solve_poisson_1d(rho: Solution1D, r: int) -> FieldSolution1D:
    """LDG solution of -φ'' = ρ with E = -φ_x, degree r, zero-mean φ."""
    return get_solver(rho.mesh, r).solve(rho)


def solve_poisson_2d(
    source: Solution2D, sign: str, r: int, space: str = SPACE_P
) -> FieldSolution2D:
    """LDG solution of the 2D field equation in P^r, or in Q^r when ``space="Q"``.

    A Q^k source is L2-projected cell by cell onto P^r before the solve.
    """
    return get_solver(source.mesh, r, space).solve(source, sign)
