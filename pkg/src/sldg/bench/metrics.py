"""Error norms and convergence tables."""

import math
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..basis.quadrature import gauss_legendre
from ..solution import Solution2D

Reference = Union[Solution2D, Callable[[np.ndarray, np.ndarray], np.ndarray]]

DOMAIN_TOL = 1e-12


class ResultRow(BaseModel):
    """One row of a convergence table; orders are None where undefined."""

    mesh: int
    cfl: float
    l2_error: float
    l2_order: Optional[float] = None
    linf_error: float
    linf_order: Optional[float] = None
    cpu_seconds: float


def _check_domains(u: Solution2D, reference: Solution2D) -> None:
    for (a0, a1), (b0, b1) in zip(u.mesh.domain, reference.mesh.domain):
        scale = max(1.0, abs(a0), abs(a1))
        if abs(a0 - b0) > DOMAIN_TOL * scale or abs(a1 - b1) > DOMAIN_TOL * scale:
            raise ValueError(
                f"Mismatched domains: {u.mesh.domain} against {reference.mesh.domain}"
            )


def compare_solutions(u: Solution2D, reference: Reference) -> Tuple[float, float]:
    """(L2, L∞) error of ``u`` against an exact function or a reference snapshot.

    Both norms use per-cell tensor Gauss points with k + 3 points per direction
    on the mesh of ``u``. The L2 error is the root mean square over the domain,
    sqrt(∫ e² / |Ω|).

    Raises:
        ValueError: If a reference snapshot lives on a different domain.
    """
    rule = gauss_legendre(u.k + 3)
    xi, eta = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    xi, eta = xi.ravel(), eta.ravel()
    weights = np.outer(rule.weights, rule.weights).ravel() * 0.25 * u.mesh.cell_area

    mesh = u.mesh
    x = mesh.mesh_x.faces[:-1, None, None] + 0.5 * mesh.dx * (xi[None, None, :] + 1.0)
    y = mesh.mesh_y.faces[None, :-1, None] + 0.5 * mesh.dy * (eta[None, None, :] + 1.0)
    x, y = np.broadcast_arrays(x, y)
    values = np.einsum("pm,ijm->ijp", u.basis.values(xi, eta), u.coeffs)

    if isinstance(reference, Solution2D):
        _check_domains(u, reference)
        exact = reference.evaluate(x, y)
    else:
        exact = np.broadcast_to(reference(x, y), x.shape)

    err = values - exact
    l2 = math.sqrt(float(np.sum(err**2 * weights)) / mesh.area)
    linf = float(np.max(np.abs(err)))
    return l2, linf


def _order(e_prev: float, e_cur: float, h_ratio: float) -> Optional[float]:
    if not (e_prev > 0.0 and e_cur > 0.0) or not np.isfinite(e_prev) or not np.isfinite(e_cur):
        return None
    if h_ratio <= 0.0 or h_ratio == 1.0:
        return None
    return math.log(e_prev / e_cur) / math.log(h_ratio)


def convergence_table(
    rows: Sequence[Tuple[int, float, float, float, float]], kind: str = "spatial"
) -> List[ResultRow]:
    """Attach orders to ``(mesh, cfl, l2, linf, cpu)`` rows.

    Spatial: log(e_{i-1}/e_i) / log(N_i/N_{i-1}), i.e. log2 under doubling.
    Temporal: log(e_i/e_{i-1}) / log(CFL_i/CFL_{i-1}).
    The first row and rows with a zero error get no order.

    Raises:
        ValueError: For fewer than two rows or an unknown kind.
    """
    if kind not in ("spatial", "temporal"):
        raise ValueError(f"kind must be 'spatial' or 'temporal', got {kind!r}")
    if len(rows) < 2:
        raise ValueError("A convergence table needs at least two rows")

    out: List[ResultRow] = []
    for i, (mesh, cfl, l2, linf, cpu) in enumerate(rows):
        l2_order = linf_order = None
        if i > 0:
            p_mesh, p_cfl, p_l2, p_linf, _ = rows[i - 1]
            if kind == "spatial":
                ratio = mesh / p_mesh
                l2_order = _order(p_l2, l2, ratio)
                linf_order = _order(p_linf, linf, ratio)
            else:
                ratio = cfl / p_cfl
                # Temporal errors grow with the step, so the ratio is inverted.
                l2_order = _order(l2, p_l2, ratio)
                linf_order = _order(linf, p_linf, ratio)
        out.append(
            ResultRow(
                mesh=int(mesh),
                cfl=float(cfl),
                l2_error=float(l2),
                l2_order=l2_order,
                linf_error=float(linf),
                linf_order=linf_order,
                cpu_seconds=float(cpu),
            )
        )
    return out
