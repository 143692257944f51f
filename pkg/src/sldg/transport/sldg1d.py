"""One-dimensional SLDG step in characteristic-Galerkin form.

For each Eulerian cell I_j and each test function Psi of P^k(I_j):

1. the k + 1 Gauss-Lobatto nodes of I_j are traced back one step; the two end
   nodes are the cell faces, so their feet bound the upstream interval I*_j,
2. Psi* is the degree-k polynomial that interpolates Psi at the feet,
3. I*_j is cut at background faces into subintervals, and
4. the new moment is sum_l int_{I*_{j,l}} u^n Psi* dx, exact by Gauss quadrature.

The batched kernel ``advance_lines`` advances many independent periodic lines
at once; the 2D splitting solver calls it once per sweep.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from utils.logger import get_logger
from utils.parallel import map_chunks, split_evenly

from ..basis.modal import SPACE_1D, get_basis, legendre_values
from ..basis.quadrature import gauss_legendre, gauss_lobatto
from ..errors import CharacteristicCrossingError, ConditioningError
from ..mesh import GEOM_TOL, Mesh1D
from ..solution import Solution1D
from ..trace import default_substeps, trace_feet_1d

log = get_logger(__name__)

# Field for a batch of lines: a(x, t) with x of shape (n_lines, n_points).
LineField = Callable[[np.ndarray, float], np.ndarray]

# Upper bound on lines * cells * pieces handled per assembly chunk.
_CHUNK_BUDGET = 60_000


@dataclass(frozen=True, eq=False)
class UpstreamInterval:
    """Upstream interval I*_j of one cell and its decomposition over background cells.

    ``subintervals`` holds ``(x_lo, x_hi, cell)`` in unwrapped physical coordinates;
    ``cell`` is the unwrapped background index (wrap with ``% n_cells``).
    """

    cell: int
    left_foot: float
    right_foot: float
    subintervals: Tuple[Tuple[float, float, int], ...]
    node_feet: np.ndarray
    node_reference: np.ndarray

    @property
    def length(self) -> float:
        return self.right_foot - self.left_foot


@dataclass(frozen=True, eq=False)
class TestPolyStar1D:
    """Psi*(x) = sum_p coeffs[p] * ((x - center) / half_width)^p."""

    center: float
    half_width: float
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: np.ndarray) -> np.ndarray:
        s = (np.asarray(x, dtype=float) - self.center) / self.half_width
        return np.polynomial.polynomial.polyval(s, self.coeffs)


def _node_positions(k: int) -> np.ndarray:
    if k < 1:
        raise ValueError(f"SLDG needs degree k >= 1 (k + 1 Gauss-Lobatto nodes), got {k}")
    return np.asarray(gauss_lobatto(k + 1).nodes)


def _check_feet(feet: np.ndarray, mesh: Mesh1D) -> None:
    """Raise if traced node feet are not strictly increasing inside every cell."""
    gaps = np.diff(feet, axis=-1)
    if np.any(gaps <= 0.0):
        where = np.argwhere(gaps <= 0.0)[0]
        raise CharacteristicCrossingError(
            "Characteristic feet are not monotone; reduce the time step",
            cell=tuple(int(i) for i in where[:-1]),
        )
    if np.any(gaps < mesh.eps):
        where = np.argwhere(gaps < mesh.eps)[0]
        raise ConditioningError(
            f"Characteristic feet closer than {mesh.eps:.3e} in cell {tuple(int(i) for i in where[:-1])}"
        )


def _snap_to_faces(t: np.ndarray) -> np.ndarray:
    nearest = np.rint(t)
    close = np.abs(t - nearest) <= GEOM_TOL * np.maximum(1.0, np.abs(nearest))
    return np.where(close, nearest, t)


def _pieces(mesh: Mesh1D, left: np.ndarray, right: np.ndarray):
    """Subinterval cut of [left, right] by background faces, in cell units.

    Returns ``(cells, lo, hi, valid)`` with a trailing piece axis; ``cells`` are
    unwrapped indices and ``lo``/``hi`` are face-snapped positions in cell units.
    """
    t_a = _snap_to_faces((left - mesh.x_lo) / mesh.dx)
    t_b = _snap_to_faces((right - mesh.x_lo) / mesh.dx)
    first = np.floor(t_a)
    last = np.ceil(t_b) - 1.0
    n_pieces = int(np.max(last - first)) + 1 if first.size else 1
    cells = first[..., None] + np.arange(n_pieces)
    lo = np.maximum(t_a[..., None], cells)
    hi = np.minimum(t_b[..., None], cells + 1.0)
    valid = (hi - lo) > GEOM_TOL
    return cells.astype(np.int64), lo, np.where(valid, hi, lo), valid


def _test_poly_coeffs(feet: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, ...]:
    """Monomial coefficients of the interpolants through ``(feet, values)``.

    Args:
        feet: ``(..., k + 1)`` node feet.
        values: ``(k + 1, n_tests)`` target values at the nodes.

    Returns:
        ``(center, half_width, coeffs)``; ``coeffs`` is ``(..., k + 1, n_tests)``.
    """
    k = feet.shape[-1] - 1
    center = 0.5 * (feet[..., 0] + feet[..., -1])
    half = 0.5 * (feet[..., -1] - feet[..., 0])
    s = (feet - center[..., None]) / half[..., None]
    vander = s[..., :, None] ** np.arange(k + 1)
    rhs = np.broadcast_to(values, vander.shape[:-2] + values.shape)
    return center, half, np.linalg.solve(vander, rhs)


def trace_line_nodes(
    mesh: Mesh1D,
    k: int,
    field: LineField,
    t_start: float,
    dt: float,
    n_lines: int,
    substeps: int = 1,
    integrator: str = "rk4",
) -> np.ndarray:
    """Feet of all Gauss-Lobatto nodes of every cell on every line.

    Faces are traced once and shared by neighbouring cells; the right face of the
    last cell is the left face of cell 0 shifted by one period, so upstream
    intervals tile exactly one period.

    Returns:
        ``(n_lines, n_cells, k + 1)`` array of unwrapped feet.
    """
    nodes = _node_positions(k)
    local = mesh.faces[:-1, None] + 0.5 * mesh.dx * (nodes[None, :k] + 1.0)
    x_end = np.broadcast_to(local.reshape(1, -1), (n_lines, mesh.n_cells * k))
    traced = trace_feet_1d(field, x_end, t_start + dt, t_start, substeps, integrator)
    traced = traced.reshape(n_lines, mesh.n_cells, k)
    right = np.empty((n_lines, mesh.n_cells))
    right[:, :-1] = traced[:, 1:, 0]
    right[:, -1] = traced[:, 0, 0] + mesh.length
    return np.concatenate([traced, right[..., None]], axis=-1)


def _assemble(mesh: Mesh1D, coeffs: np.ndarray, feet: np.ndarray) -> np.ndarray:
    """New modal coefficients of a batch of lines from their traced node feet."""
    n_lines, n_cells, n_nodes = feet.shape
    k = n_nodes - 1
    test_values = legendre_values(k, _node_positions(k))
    center, half, psi_coeffs = _test_poly_coeffs(feet, test_values)

    cells, lo, hi, valid = _pieces(mesh, feet[..., 0], feet[..., -1])
    rule = gauss_legendre(k + 1)
    t_q = lo[..., None] + 0.5 * (hi - lo)[..., None] * (rule.nodes + 1.0)
    xi = 2.0 * (t_q - cells[..., None]) - 1.0
    s = (mesh.x_lo + t_q * mesh.dx - center[:, :, None, None]) / half[:, :, None, None]
    weights = rule.weights * (0.5 * mesh.dx * np.where(valid, hi - lo, 0.0))[..., None]

    line_idx = np.arange(n_lines)[:, None, None]
    u_cells = coeffs[line_idx, np.mod(cells, n_cells)]
    u_vals = np.einsum("lcpga,lcpa->lcpg", legendre_values(k, xi), u_cells)
    powers = s[..., None] ** np.arange(k + 1)
    psi_vals = np.einsum("lcpgr,lcrt->lcpgt", powers, psi_coeffs)
    moments = np.einsum("lcpg,lcpg,lcpgt->lct", weights, u_vals, psi_vals)
    mass = 0.5 * mesh.dx * get_basis(k, SPACE_1D).mass_ref
    return moments / mass


def advance_lines(
    mesh: Mesh1D,
    coeffs: np.ndarray,
    field: LineField,
    t_start: float,
    dt: float,
    substeps: Optional[int] = None,
    integrator: str = "rk4",
    workers: int = 1,
) -> np.ndarray:
    """Advance a batch of independent periodic lines by one SLDG step.

    Args:
        mesh: Common 1D mesh of all lines.
        coeffs: ``(n_lines, n_cells, k + 1)`` modal coefficients at ``t_start``.
        field: ``a(x, t)`` for ``x`` of shape ``(n_lines, n_points)``.
        t_start: Time level t^n.
        dt: Step size (no CFL restriction).
        substeps: Tracing substeps; defaults to ``max(1, ceil(CFL))`` with the CFL
            measured from the field at the nodes.
        integrator: ``"rk4"`` or ``"euler"``.
        workers: Thread count for the assembly.

    Returns:
        ``(n_lines, n_cells, k + 1)`` coefficients at ``t_start + dt``.

    Raises:
        CharacteristicCrossingError: If node feet are not monotone.
        ConditioningError: If two feet nearly coincide.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    n_lines, n_cells, n_modes = coeffs.shape
    if n_cells != mesh.n_cells:
        raise ValueError(f"Line coefficients have {n_cells} cells, mesh has {mesh.n_cells}")
    k = n_modes - 1
    if dt == 0.0:
        return coeffs.copy()
    if substeps is None:
        nodes = mesh.faces[:-1]
        speed = np.max(np.abs(field(np.broadcast_to(nodes, (n_lines, n_cells)), t_start + dt)))
        substeps = default_substeps(speed * dt / mesh.dx)

    feet = trace_line_nodes(mesh, k, field, t_start, dt, n_lines, substeps, integrator)
    _check_feet(feet, mesh)

    span = float(np.max(feet[..., -1] - feet[..., 0])) / mesh.dx + 2.0
    per_chunk = max(1, int(_CHUNK_BUDGET // max(1.0, n_cells * span)))
    chunks = split_evenly(n_lines, -(-n_lines // per_chunk))
    results = map_chunks(
        lambda rows: _assemble(mesh, coeffs[rows.start : rows.stop], feet[rows.start : rows.stop]),
        chunks,
        workers,
    )
    log.debug(f"Advanced {n_lines} lines over dt={dt:.6g} with {substeps} tracing substeps")
    return np.concatenate(results, axis=0)


def build_upstream_interval(
    mesh: Mesh1D,
    j: int,
    field: Callable[[np.ndarray, float], np.ndarray],
    t_end: float,
    dt: float,
    k: int,
    substeps: int = 1,
    integrator: str = "rk4",
) -> UpstreamInterval:
    """Trace the Gauss-Lobatto nodes of cell ``j`` and decompose its upstream interval.

    Raises:
        CharacteristicCrossingError: If the feet are not increasing.
    """
    nodes = _node_positions(k)
    x_nodes = mesh.to_physical(j, nodes)
    feet = trace_feet_1d(field, x_nodes, t_end, t_end - dt, substeps, integrator)
    _check_feet(feet[None, :], mesh)
    cells, lo, hi, valid = _pieces(mesh, feet[:1], feet[-1:])
    subintervals = tuple(
        (mesh.x_lo + lo[0, p] * mesh.dx, mesh.x_lo + hi[0, p] * mesh.dx, int(cells[0, p]))
        for p in range(cells.shape[-1])
        if valid[0, p]
    )
    return UpstreamInterval(
        cell=j,
        left_foot=float(feet[0]),
        right_foot=float(feet[-1]),
        subintervals=subintervals,
        node_feet=feet,
        node_reference=nodes,
    )


def interpolate_test_poly(up: UpstreamInterval, psi: Union[int, np.ndarray]) -> TestPolyStar1D:
    """Degree-k polynomial interpolating ``Psi`` of cell j at the traced feet.

    Args:
        up: Upstream interval of cell j.
        psi: Index of a Legendre basis function of P^k(I_j), or modal coefficients.

    Raises:
        ConditioningError: If two feet are closer than the geometric tolerance.
    """
    k = len(up.node_feet) - 1
    if isinstance(psi, (int, np.integer)):
        modal = np.zeros(k + 1)
        modal[psi] = 1.0
    else:
        modal = np.asarray(psi, dtype=float)
    gaps = np.diff(up.node_feet)
    if np.any(gaps < GEOM_TOL * max(1.0, abs(up.length))):
        raise ConditioningError(f"Feet of cell {up.cell} nearly coincide: gaps {gaps}")
    values = legendre_values(k, up.node_reference) @ modal
    center, half, coeffs = _test_poly_coeffs(up.node_feet, values[:, None])
    return TestPolyStar1D(center=float(center), half_width=float(half), coeffs=coeffs[:, 0])


def step_1d(
    u: Solution1D,
    field: Callable[[np.ndarray, float], np.ndarray],
    dt: float,
    substeps: Optional[int] = None,
    integrator: str = "rk4",
) -> Solution1D:
    """One SLDG step of ``u_t + (a(x, t) u)_x = 0`` from ``u.time`` to ``u.time + dt``."""
    new = advance_lines(u.mesh, u.coeffs[None], field, u.time, dt, substeps, integrator)
    return u.with_coeffs(new[0], time=u.time + dt)
