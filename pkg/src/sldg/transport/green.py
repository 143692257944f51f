"""Least-squares adjoint test polynomials and Green's-theorem area integrals.

Area integrals over subregions are turned into boundary integrals with P = 0
and Q(x, y) = int_{x_ref}^{x} F(x', y) dx', where x_ref is the left face of the
background cell. The inner x-integral uses k + 1 Gauss points (exact for the
degree-2k integrand); the outer integral along a straight piece uses k + 1
points and along a curved piece 6 points.
"""

from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from ..basis.modal import SPACE_P, ModalPoly2D, get_basis, mode_indices
from ..basis.quadrature import gauss_legendre
from ..errors import ConditioningError
from ..mesh import Mesh2D
from .clipping import SubRegion
from .upstream import UpstreamCell

CURVED_POINTS = 6
MAX_CONDITION = 1e12

# Per-point integrand F(x', y, segment index) -> (..., n_tests)
Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TestPolyStar2D:
    """Psi*(x, y) = sum_r coeffs[r] * X^a_r * Y^b_r with X, Y scaled about ``center``.

    ``X = (x - center[0]) / scale[0]``, ``Y = (y - center[1]) / scale[1]`` and the
    exponents follow the P^k mode order. ``residual`` is the largest
    least-squares residual over the constraint points.
    """

    k: int
    center: Tuple[float, float]
    scale: Tuple[float, float]
    coeffs: np.ndarray
    residual: float = 0.0

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        mono = monomials(
            self.k,
            (np.asarray(x, dtype=float) - self.center[0]) / self.scale[0],
            (np.asarray(y, dtype=float) - self.center[1]) / self.scale[1],
        )
        return mono @ self.coeffs


def monomials(k: int, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Scaled monomials X^a Y^b in P^k mode order; shape ``X.shape + (n_modes,)``."""
    powers = mode_indices(k, SPACE_P)
    X, Y = np.broadcast_arrays(X, Y)
    xp = X[..., None] ** np.arange(k + 1)
    yp = Y[..., None] ** np.arange(k + 1)
    a = np.array([p for p, _ in powers])
    b = np.array([q for _, q in powers])
    return xp[..., a] * yp[..., b]


def fit_test_polys(
    feet: np.ndarray, reference: np.ndarray, k: int, mesh: Mesh2D
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched least-squares fit of every P^k test function at the traced feet.

    Args:
        feet: ``(n_cells, n_points, 2)`` constraint feet.
        reference: ``(n_points, 2)`` reference coordinates of the traced origins.
        k: Degree.
        mesh: Mesh supplying the monomial scaling (dx/2, dy/2).

    Returns:
        ``(centers, coeffs, residuals)`` with ``coeffs`` of shape
        ``(n_cells, n_modes, n_tests)``.

    Raises:
        ConditioningError: If a normal matrix is rank deficient or its
            condition number exceeds 1e12 after column scaling.
    """
    basis = get_basis(k, SPACE_P)
    centers = feet.mean(axis=1)
    scale = np.array([0.5 * mesh.dx, 0.5 * mesh.dy])
    local = (feet - centers[:, None, :]) / scale
    A = monomials(k, local[..., 0], local[..., 1])
    B = basis.values(reference[:, 0], reference[:, 1])

    norms = np.sqrt(np.sum(A**2, axis=1))
    if np.any(norms == 0.0):
        raise ConditioningError("Least-squares constraints give a zero column")
    As = A / norms[:, None, :]
    normal = np.einsum("npr,nps->nrs", As, As)
    cond = np.linalg.cond(normal)
    if not np.all(np.isfinite(cond)) or np.any(cond > MAX_CONDITION):
        bad = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
        raise ConditioningError(
            f"Least-squares test polynomial is ill-conditioned (cond={cond[bad]:.3e}) "
            f"for constraint set {bad}"
        )
    rhs = np.einsum("npr,pt->nrt", As, B)
    coeffs = np.linalg.solve(normal, rhs) / norms[:, :, None]
    residuals = np.max(np.abs(np.einsum("npr,nrt->npt", A, coeffs) - B), axis=(1, 2))
    return centers, coeffs, residuals


def reconstruct_test_poly(
    uc: UpstreamCell, psi: Union[int, np.ndarray], k: int, mesh: Mesh2D
) -> TestPolyStar2D:
    """Least-squares P^k polynomial matching ``Psi`` of the Eulerian cell at the feet.

    Degree 1 fits the four corner constraints; degree 2 fits the nine traced
    points (corners, edge midpoints, centre).

    Args:
        uc: Upstream cell with its traced feet.
        psi: Index of a P^k Legendre basis function, or modal coefficients.
        k: Degree.
        mesh: Background mesh.
    """
    basis = get_basis(k, SPACE_P)
    if isinstance(psi, (int, np.integer)):
        modal = np.zeros(basis.size)
        modal[psi] = 1.0
    else:
        modal = np.asarray(psi, dtype=float)
    feet, reference = uc.constraint_points(k)
    centers, coeffs, _ = fit_test_polys(feet[None], reference, k, mesh)
    c = coeffs[0] @ modal
    scale = (0.5 * mesh.dx, 0.5 * mesh.dy)
    local = (feet - centers[0]) / np.array(scale)
    fitted = monomials(k, local[:, 0], local[:, 1]) @ c
    target = basis.values(reference[:, 0], reference[:, 1]) @ modal
    return TestPolyStar2D(
        k=k,
        center=(float(centers[0, 0]), float(centers[0, 1])),
        scale=scale,
        coeffs=c,
        residual=float(np.max(np.abs(fitted - target))),
    )


@dataclass(frozen=True, eq=False)
class SegmentBatch:
    """Flat arrays describing many boundary pieces in power form.

    Straight pieces are stored as ``c0 = start``, ``c1 = end - start``, ``c2 = 0``
    on ``s`` in [0, 1].
    """

    owner: np.ndarray
    cell_x: np.ndarray
    cell_y: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    s_lo: np.ndarray
    s_hi: np.ndarray
    curved: np.ndarray

    def __len__(self) -> int:
        return len(self.owner)

    def take(self, rows: np.ndarray) -> "SegmentBatch":
        return SegmentBatch(**{name: getattr(self, name)[rows] for name in self.__dataclass_fields__})


def collect_segments(regions: Sequence[Tuple[int, SubRegion]]) -> SegmentBatch:
    """Flatten ``(owner, subregion)`` pairs into a SegmentBatch."""
    owner, cx, cy, c0, c1, c2, lo, hi, curved = ([] for _ in range(9))
    for own, sr in regions:
        for seg in sr.segments:
            owner.append(own)
            cx.append(sr.cell[0])
            cy.append(sr.cell[1])
            if seg.curve is None:
                c0.append(seg.start)
                c1.append((seg.end[0] - seg.start[0], seg.end[1] - seg.start[1]))
                c2.append((0.0, 0.0))
                lo.append(0.0)
                hi.append(1.0)
                curved.append(False)
            else:
                c0.append(seg.curve[0])
                c1.append(seg.curve[1])
                c2.append(seg.curve[2])
                lo.append(seg.s_lo)
                hi.append(seg.s_hi)
                curved.append(True)
    as2 = lambda values: np.asarray(values, dtype=float).reshape(-1, 2)
    return SegmentBatch(
        owner=np.asarray(owner, dtype=np.int64),
        cell_x=np.asarray(cx, dtype=np.int64),
        cell_y=np.asarray(cy, dtype=np.int64),
        c0=as2(c0),
        c1=as2(c1),
        c2=as2(c2),
        s_lo=np.asarray(lo, dtype=float),
        s_hi=np.asarray(hi, dtype=float),
        curved=np.asarray(curved, dtype=bool),
    )


def boundary_integrals(
    batch: SegmentBatch, mesh: Mesh2D, integrand: Integrand, inner_points: int, outer_points: int
) -> np.ndarray:
    """Line integrals of Q dy over every piece of a batch; shape ``(n_segments, n_tests)``."""
    outer = gauss_legendre(outer_points)
    inner = gauss_legendre(inner_points)
    half = 0.5 * (batch.s_hi - batch.s_lo)
    s = batch.s_lo[:, None] + half[:, None] * (outer.nodes + 1.0)
    X = batch.c0[:, None, 0] + s * (batch.c1[:, None, 0] + s * batch.c2[:, None, 0])
    Y = batch.c0[:, None, 1] + s * (batch.c1[:, None, 1] + s * batch.c2[:, None, 1])
    dY = batch.c1[:, None, 1] + 2.0 * s * batch.c2[:, None, 1]

    x_ref = mesh.mesh_x.x_lo + batch.cell_x * mesh.dx
    span = X - x_ref[:, None]
    xp = x_ref[:, None, None] + 0.5 * span[..., None] * (inner.nodes + 1.0)
    yp = np.broadcast_to(Y[..., None], xp.shape)
    values = integrand(xp, yp, np.arange(len(batch)))
    q_vals = np.einsum("i,sgi...->sg...", inner.weights, values) * (0.5 * span)[..., None]
    return np.einsum("g,sg,sgt->st", outer.weights, half[:, None] * dY, q_vals)


def product_integrand(
    batch: SegmentBatch,
    mesh: Mesh2D,
    u_coeffs: np.ndarray,
    k_u: int,
    space_u: str,
    centers: np.ndarray,
    psi_coeffs: np.ndarray,
    k: int,
) -> Integrand:
    """Integrand u_l(x, y) * Psi*_t(x, y) for every test index t of each piece's owner.

    ``u_coeffs`` is the full ``(nx, ny, n_modes)`` array; background indices are
    wrapped when fetching coefficients and local coordinates are taken relative
    to the unwrapped cell.
    """
    basis_u = get_basis(k_u, space_u)
    scale = np.array([0.5 * mesh.dx, 0.5 * mesh.dy])

    def integrand(x, y, rows):
        cx, cy = batch.cell_x[rows], batch.cell_y[rows]
        x_ref = mesh.mesh_x.x_lo + cx * mesh.dx
        y_ref = mesh.mesh_y.x_lo + cy * mesh.dy
        xi = 2.0 * (x - x_ref[:, None, None]) / mesh.dx - 1.0
        eta = 2.0 * (y - y_ref[:, None, None]) / mesh.dy - 1.0
        coeff = u_coeffs[np.mod(cx, mesh.nx), np.mod(cy, mesh.ny)]
        u = np.einsum("sgim,sm->sgi", basis_u.values(xi, eta), coeff)
        owner = batch.owner[rows]
        ctr = centers[owner]
        mono = monomials(
            k,
            (x - ctr[:, 0, None, None]) / scale[0],
            (y - ctr[:, 1, None, None]) / scale[1],
        )
        psi = np.einsum("sgir,srt->sgit", mono, psi_coeffs[owner])
        return u[..., None] * psi

    return integrand


def integrate_batch(
    batch: SegmentBatch,
    mesh: Mesh2D,
    u_coeffs: np.ndarray,
    k_u: int,
    space_u: str,
    centers: np.ndarray,
    psi_coeffs: np.ndarray,
    k: int,
    chunk: int = 20_000,
) -> np.ndarray:
    """Per-piece moments of u * Psi*; straight and curved pieces use their own rules."""
    n_tests = psi_coeffs.shape[-1]
    out = np.zeros((len(batch), n_tests))
    inner_points = max(k, k_u) + 1
    for curved, outer_points in ((False, max(k, k_u) + 1), (True, CURVED_POINTS)):
        rows_all = np.flatnonzero(batch.curved == curved)
        for start in range(0, len(rows_all), chunk):
            rows = rows_all[start : start + chunk]
            sub = batch.take(rows)
            integrand = product_integrand(sub, mesh, u_coeffs, k_u, space_u, centers, psi_coeffs, k)
            out[rows] = boundary_integrals(sub, mesh, integrand, inner_points, outer_points)
    return out


def green_integral(
    u_l: ModalPoly2D, psi_star: TestPolyStar2D, sr: SubRegion, mesh: Mesh2D
) -> float:
    """Integral of ``u_l * Psi*`` over a subregion via Green's theorem.

    ``u_l`` is the background polynomial of ``sr.cell`` (reference coordinates of
    that cell); ``Psi*`` is in physical coordinates.
    """
    batch = collect_segments([(0, sr)])
    coeffs = np.zeros((mesh.nx, mesh.ny, len(u_l.coeffs)))
    ix, iy = sr.wrapped(mesh)
    coeffs[ix, iy] = u_l.coeffs
    centers = np.array([psi_star.center])
    # Psi* may carry a non-default scale; fold it into monomials on the mesh scale.
    psi = _rescale(psi_star, mesh)[None, :, None]
    total = integrate_batch(batch, mesh, coeffs, u_l.k, u_l.space, centers, psi, psi_star.k)
    return float(np.sum(total))


def _rescale(psi_star: TestPolyStar2D, mesh: Mesh2D) -> np.ndarray:
    sx = (0.5 * mesh.dx) / psi_star.scale[0]
    sy = (0.5 * mesh.dy) / psi_star.scale[1]
    powers = mode_indices(psi_star.k, SPACE_P)
    return np.array([c * sx**a * sy**b for c, (a, b) in zip(psi_star.coeffs, powers)])
