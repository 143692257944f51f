"""Two-dimensional SLDG without splitting, on P^k with k in {1, 2}.

Per Eulerian cell A_j the step solves

    int_{A_j} u^{n+1} Psi dx dy = sum_l int_{A*_j ∩ A_l} u^n Psi* dx dy

where A*_j is the (quadrilateral or quadratic-curved) upstream cell and Psi*
the least-squares test polynomial fitted at the traced feet.
"""

from typing import List, Optional, Tuple

import numpy as np

from utils.logger import get_logger
from utils.parallel import map_chunks, split_evenly

from ..basis.modal import SPACE_P, get_basis
from ..mesh import Mesh2D
from ..solution import Solution2D
from ..trace import VelocityField2D
from .clipping import SubRegion, clip_upstream
from .green import collect_segments, fit_test_polys, integrate_batch
from .upstream import (
    CENTER_REF,
    CORNER_REF,
    MIDPOINT_REF,
    MODES,
    GridFeet,
    check_corner_quads,
    estimate_substeps,
    trace_grid_feet,
    traced_point_sets,
)

log = get_logger(__name__)

SUPPORTED_DEGREES = (1, 2)


def constraint_feet(feet: GridFeet, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Least-squares constraint feet of every cell, ``(nx * ny, n_points, 2)``, and their origins."""
    corners = feet.corners()
    nx, ny = corners.shape[:2]
    if k <= 1:
        return corners.reshape(nx * ny, 4, 2), CORNER_REF
    stacked = np.concatenate([corners, feet.midpoints(), feet.centers[:, :, None, :]], axis=2)
    return stacked.reshape(nx * ny, 9, 2), np.vstack([CORNER_REF, MIDPOINT_REF, CENTER_REF])


def upstream_subregions(
    feet: GridFeet, mesh: Mesh2D, mode: str, cells: range
) -> List[Tuple[int, SubRegion]]:
    """Clip the upstream cells with flat indices in ``cells``; returns ``(owner, subregion)`` pairs."""
    pairs = []
    for flat in cells:
        ix, iy = divmod(flat, mesh.ny)
        for sr in clip_upstream(feet.cell(ix, iy, mode), mesh):
            pairs.append((flat, sr))
    return pairs


def step_2d(
    u: Solution2D,
    field: VelocityField2D,
    dt: float,
    mode: str = "quad",
    substeps: Optional[int] = None,
    integrator: str = "rk4",
    workers: int = 1,
) -> Solution2D:
    """One non-splitting SLDG step of ``u_t + (a u)_x + (b u)_y = 0``.

    Args:
        u: P^k solution at ``u.time``.
        field: Velocity field; tracing runs backward from ``u.time + dt``.
        dt: Step size (no CFL restriction).
        mode: ``"quad"`` (straight edges) or ``"qc"`` (quadratic-curved edges).
        substeps: Tracing substeps; defaults to ``max(1, ceil(CFL))``.
        integrator: ``"rk4"`` or ``"euler"``.
        workers: Thread count for clipping and assembly.

    Returns:
        P^k solution at ``u.time + dt``.

    Raises:
        CharacteristicCrossingError: If an upstream corner quadrilateral is
            inverted or self-intersecting.
        ConditioningError: If a least-squares test polynomial is ill-posed.
        GeometryError: If a curved-edge crossing cannot be bracketed.
    """
    if u.space != SPACE_P:
        raise ValueError(f"The non-splitting scheme works on P^k solutions, got space {u.space!r}")
    if u.k not in SUPPORTED_DEGREES:
        raise ValueError(f"The non-splitting scheme supports k in {SUPPORTED_DEGREES}, got {u.k}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if dt == 0.0:
        return u.with_coeffs(u.coeffs.copy())

    mesh, k = u.mesh, u.k
    t_end = u.time + dt
    if substeps is None:
        substeps = estimate_substeps(mesh, field, t_end, dt)

    feet = trace_grid_feet(
        mesh, field, t_end, dt, traced_point_sets(mode, k), substeps, integrator
    )
    corners = feet.corners()
    check_corner_quads(corners)

    points, reference = constraint_feet(feet, k)
    centers, psi_coeffs, residuals = fit_test_polys(points, reference, k, mesh)

    n_cells = mesh.nx * mesh.ny
    basis = get_basis(k, SPACE_P)

    def assemble(cells: range) -> np.ndarray:
        pairs = upstream_subregions(feet, mesh, mode, cells)
        batch = collect_segments(pairs)
        moments = integrate_batch(
            batch, mesh, u.coeffs, k, SPACE_P, centers, psi_coeffs, k
        )
        out = np.zeros((n_cells, basis.size))
        np.add.at(out, batch.owner, moments)
        return out

    chunks = split_evenly(n_cells, max(1, 4 * workers))
    rhs = np.sum(map_chunks(assemble, chunks, workers), axis=0)

    mass = 0.25 * mesh.dx * mesh.dy * basis.mass_ref
    coeffs = (rhs / mass).reshape(mesh.nx, mesh.ny, basis.size)
    log.debug(
        f"Non-splitting step t={u.time:.6g} -> {t_end:.6g}, mode={mode}, substeps={substeps}, "
        f"max least-squares residual {float(np.max(residuals)):.3e}"
    )
    return u.with_coeffs(coeffs, time=t_end)
