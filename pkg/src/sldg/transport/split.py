"""Two-dimensional SLDG by Strang dimensional splitting on Q^k.

A Q^k field restricted to the line y = y_{j,q} (a Gauss node of row j) is a
degree-k polynomial in x, so every x-sweep is a batch of 1D SLDG problems, one
per (row, Gauss node). Sweeps in y work the same way on columns.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from utils.logger import get_logger

from ..basis.modal import SPACE_Q, legendre_values
from ..basis.quadrature import gauss_legendre
from ..mesh import Mesh1D
from ..solution import Solution2D
from .sldg1d import advance_lines

log = get_logger(__name__)

DIRECTIONS = ("x", "y")

# Split speed a(x, y, t) for x-sweeps or b(x, y, t) for y-sweeps.
SplitField = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class LineFamily:
    """All 1D lines of one sweep direction through one transverse Gauss node.

    ``coeffs[t, i, a]`` is mode ``a`` along the line in cell ``i`` of the line
    through transverse cell ``t`` at reference node ``node``.
    """

    direction: str
    node_index: int
    node: float
    positions: np.ndarray
    mesh: Mesh1D
    coeffs: np.ndarray


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def _check_q(u: Solution2D) -> None:
    if u.space != SPACE_Q:
        raise ValueError(f"Dimensional splitting works on Q^k solutions, got space {u.space!r}")


def _line_array(u: Solution2D, direction: str) -> np.ndarray:
    """Lines as ``(n_transverse, k + 1 nodes, n_along, k + 1)``."""
    c = u.tensor_coeffs()
    nodes = gauss_legendre(u.k + 1).nodes
    p_nodes = legendre_values(u.k, nodes)
    if direction == "x":
        return np.einsum("ijab,qb->jqia", c, p_nodes)
    return np.einsum("ijab,qa->iqjb", c, p_nodes)


def _from_line_array(u: Solution2D, lines: np.ndarray, direction: str) -> np.ndarray:
    """Inverse of ``_line_array`` by Gauss projection in the transverse direction."""
    k = u.k
    rule = gauss_legendre(k + 1)
    p_nodes = legendre_values(k, rule.nodes)
    proj = (2.0 * np.arange(k + 1) + 1.0) / 2.0 * (rule.weights[:, None] * p_nodes)
    if direction == "x":
        c = np.einsum("jqia,qb->ijab", lines, proj)
    else:
        c = np.einsum("iqjb,qa->ijab", lines, proj)
    return c.reshape(u.mesh.nx, u.mesh.ny, (k + 1) ** 2)


def _transverse_positions(u: Solution2D, direction: str) -> np.ndarray:
    """Physical transverse coordinate of every line, ``(n_transverse, k + 1)``."""
    nodes = gauss_legendre(u.k + 1).nodes
    mesh = u.mesh.mesh_y if direction == "x" else u.mesh.mesh_x
    return mesh.faces[:-1, None] + 0.5 * mesh.dx * (nodes[None, :] + 1.0)


def extract_lines(u: Solution2D, direction: str) -> List[LineFamily]:
    """Restrict a Q^k field to the lines through transverse Gauss nodes.

    Returns one family per transverse Gauss node, ordered by node index.
    """
    _check_direction(direction)
    _check_q(u)
    lines = _line_array(u, direction)
    positions = _transverse_positions(u, direction)
    nodes = gauss_legendre(u.k + 1).nodes
    mesh = u.mesh.mesh_x if direction == "x" else u.mesh.mesh_y
    return [
        LineFamily(
            direction=direction,
            node_index=q,
            node=float(nodes[q]),
            positions=positions[:, q],
            mesh=mesh,
            coeffs=lines[:, q],
        )
        for q in range(u.k + 1)
    ]


def insert_lines(
    families: Sequence[LineFamily], direction: str, template: Solution2D
) -> Solution2D:
    """Rebuild the unique Q^k field whose restrictions are the given line families.

    Args:
        families: One family per transverse Gauss node, in any order.
        direction: Sweep direction the families were extracted for.
        template: Solution supplying mesh, degree and time.

    Raises:
        ValueError: If a family is missing, duplicated or of the wrong direction.
    """
    _check_direction(direction)
    _check_q(template)
    by_node = {}
    for family in families:
        if family.direction != direction:
            raise ValueError(f"Family for direction {family.direction!r} given for {direction!r}")
        if family.node_index in by_node:
            raise ValueError(f"Duplicate line family for node {family.node_index}")
        by_node[family.node_index] = family
    missing = [q for q in range(template.k + 1) if q not in by_node]
    if missing:
        raise ValueError(f"Missing line families for transverse nodes {missing}")
    lines = np.stack([by_node[q].coeffs for q in range(template.k + 1)], axis=1)
    return template.with_coeffs(_from_line_array(template, lines, direction))


def sweep(
    u: Solution2D,
    direction: str,
    speed: SplitField,
    t_start: float,
    dt: float,
    substeps: Optional[int] = None,
    integrator: str = "rk4",
    workers: int = 1,
) -> Solution2D:
    """Advance every line of one direction by a 1D SLDG step of length ``dt``.

    The speed is frozen at each line's transverse coordinate: an x-sweep uses
    ``a(x, y_line, t)``, a y-sweep uses ``b(x_line, y, t)``. The returned
    solution keeps ``u.time``; the caller owns the time bookkeeping.
    """
    _check_direction(direction)
    _check_q(u)
    lines = _line_array(u, direction)
    n_t, n_q, n_along, n_modes = lines.shape
    positions = _transverse_positions(u, direction).reshape(-1, 1)
    mesh = u.mesh.mesh_x if direction == "x" else u.mesh.mesh_y

    if direction == "x":

        def line_field(x, t):
            return speed(x, np.broadcast_to(positions, x.shape), t)

    else:

        def line_field(y, t):
            return speed(np.broadcast_to(positions, y.shape), y, t)

    flat = lines.reshape(n_t * n_q, n_along, n_modes)
    advanced = advance_lines(mesh, flat, line_field, t_start, dt, substeps, integrator, workers)
    new = advanced.reshape(n_t, n_q, n_along, n_modes)
    return u.with_coeffs(_from_line_array(u, new, direction))


def strang_step(
    u: Solution2D,
    a_field: SplitField,
    b_field: SplitField,
    t_start: float,
    dt: float,
    substeps: Optional[int] = None,
    after_sweep: Optional[Callable[[Solution2D], Solution2D]] = None,
    workers: int = 1,
) -> Solution2D:
    """One Strang step: x over dt/2, y over dt, x over dt/2.

    Sweep time windows are [t, t + dt/2] for the first x-sweep, [t, t + dt] for
    the y-sweep and [t + dt/2, t + dt] for the last x-sweep, so time-dependent
    fields keep their time dependence inside each sweep.

    Args:
        u: Q^k solution at ``t_start``.
        a_field: x-velocity ``a(x, y, t)``.
        b_field: y-velocity ``b(x, y, t)``.
        t_start: Time level t^n.
        dt: Step size.
        substeps: Tracing substeps per sweep (default from the measured CFL).
        after_sweep: Optional hook applied after each sweep (e.g. a limiter).
        workers: Thread count for line assembly.

    Returns:
        Q^k solution at ``t_start + dt``.
    """
    hook = after_sweep or (lambda s: s)
    half = 0.5 * dt
    v = hook(sweep(u, "x", a_field, t_start, half, substeps, workers=workers))
    v = hook(sweep(v, "y", b_field, t_start, dt, substeps, workers=workers))
    v = hook(sweep(v, "x", a_field, t_start + half, half, substeps, workers=workers))
    return v.with_coeffs(v.coeffs, time=t_start + dt)
