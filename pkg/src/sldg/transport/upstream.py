"""Upstream cells of the non-splitting 2D scheme.

An upstream cell is the image of an Eulerian cell under the backward flow over
one step. It is approximated either by the quadrilateral through the four
traced corner feet (``quad``) or by a quadratic-curved quadrilateral whose
edges interpolate the traced corner and edge-midpoint feet (``qc``).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import CharacteristicCrossingError
from ..mesh import GEOM_TOL, Mesh1D, Mesh2D
from ..trace import VelocityField2D, trace_feet_2d

MODES = ("quad", "qc")

Point = Tuple[float, float]

# Reference coordinates of the traced points of a cell, in constraint order:
# corners c1..c4 (counter-clockwise from bottom-left), edge midpoints m1..m4
# (bottom, right, top, left), centre.
CORNER_REF = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
MIDPOINT_REF = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
CENTER_REF = np.array([[0.0, 0.0]])


@dataclass(frozen=True)
class Segment:
    """Oriented boundary piece: a straight segment or a span of a quadratic curve.

    A curved segment is the span ``[s_lo, s_hi]`` of ``c0 + c1 s + c2 s^2``;
    ``start`` and ``end`` are its (grid-snapped) endpoints.
    """

    start: Point
    end: Point
    curve: Optional[Tuple[Point, Point, Point]] = None
    s_lo: float = 0.0
    s_hi: float = 1.0

    @property
    def curved(self) -> bool:
        return self.curve is not None

    def point(self, s: float) -> Point:
        """Point at curve parameter ``s`` (for straight segments, ``s`` in [0, 1])."""
        if self.curve is None:
            return (
                self.start[0] + s * (self.end[0] - self.start[0]),
                self.start[1] + s * (self.end[1] - self.start[1]),
            )
        c0, c1, c2 = self.curve
        return (c0[0] + s * (c1[0] + s * c2[0]), c0[1] + s * (c1[1] + s * c2[1]))

    def midpoint(self) -> Point:
        if self.curve is None:
            return (0.5 * (self.start[0] + self.end[0]), 0.5 * (self.start[1] + self.end[1]))
        return self.point(0.5 * (self.s_lo + self.s_hi))

    def reversed(self) -> "Segment":
        if self.curve is None:
            return Segment(start=self.end, end=self.start)
        # Substitute s -> 1 - s to keep a power form on a reversed parameter.
        c0, c1, c2 = self.curve
        r0 = (c0[0] + c1[0] + c2[0], c0[1] + c1[1] + c2[1])
        r1 = (-c1[0] - 2.0 * c2[0], -c1[1] - 2.0 * c2[1])
        return Segment(
            start=self.end,
            end=self.start,
            curve=(r0, r1, c2),
            s_lo=1.0 - self.s_hi,
            s_hi=1.0 - self.s_lo,
        )


def quadratic_edge(a: Point, m: Point, b: Point) -> Segment:
    """Quadratic curve through ``a``, ``m``, ``b`` at s = 0, 1/2, 1."""
    c1 = (-3.0 * a[0] + 4.0 * m[0] - b[0], -3.0 * a[1] + 4.0 * m[1] - b[1])
    c2 = (2.0 * a[0] - 4.0 * m[0] + 2.0 * b[0], 2.0 * a[1] - 4.0 * m[1] + 2.0 * b[1])
    return Segment(start=a, end=b, curve=(a, c1, c2))


@dataclass(frozen=True, eq=False)
class UpstreamCell:
    """Traced feet of one Eulerian cell and the boundary of its upstream approximation.

    ``corners`` is ``(4, 2)`` counter-clockwise from the bottom-left foot;
    ``midpoints`` ``(4, 2)`` and ``center`` ``(2,)`` are present when they were
    traced (qc mode, or degree 2 constraints).
    """

    cell: Tuple[int, int]
    mode: str
    corners: np.ndarray
    midpoints: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    edges: List[Segment] = field(default_factory=list)

    @property
    def signed_area(self) -> float:
        """Shoelace area of the corner quadrilateral."""
        x, y = self.corners[:, 0], self.corners[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    def constraint_points(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Feet and reference origins used by the least-squares test polynomial.

        Degree 1 uses the four corners; degree 2 uses all nine traced points.
        """
        if k <= 1:
            return self.corners, CORNER_REF
        if self.midpoints is None or self.center is None:
            raise ValueError("Degree-2 test polynomials need edge-midpoint and centre feet")
        feet = np.vstack([self.corners, self.midpoints, self.center[None, :]])
        return feet, np.vstack([CORNER_REF, MIDPOINT_REF, CENTER_REF])


def build_edges(
    corners: np.ndarray, mode: str, midpoints: Optional[np.ndarray] = None
) -> List[Segment]:
    """Counter-clockwise boundary of the upstream approximation."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    pts = [(float(p[0]), float(p[1])) for p in corners]
    if mode == "quad":
        return [Segment(start=pts[q], end=pts[(q + 1) % 4]) for q in range(4)]
    if midpoints is None:
        raise ValueError("qc mode needs traced edge midpoints")
    mids = [(float(p[0]), float(p[1])) for p in midpoints]
    return [quadratic_edge(pts[q], mids[q], pts[(q + 1) % 4]) for q in range(4)]


def snap_to_grid(values: np.ndarray, mesh: Mesh1D) -> np.ndarray:
    """Move coordinates lying within the geometric tolerance of a grid line onto it."""
    t = (values - mesh.x_lo) / mesh.dx
    nearest = np.rint(t)
    close = np.abs(t - nearest) <= GEOM_TOL * np.maximum(1.0, np.abs(nearest))
    return np.where(close, mesh.x_lo + nearest * mesh.dx, values)


def _orientation(p, q, r):
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (
        r[..., 0] - p[..., 0]
    )


def _segments_cross(a, b, c, d):
    """Proper intersection of segments ab and cd (vectorised)."""
    o1 = _orientation(a, b, c)
    o2 = _orientation(a, b, d)
    o3 = _orientation(c, d, a)
    o4 = _orientation(c, d, b)
    return (o1 * o2 < 0.0) & (o3 * o4 < 0.0)


def check_corner_quads(corners: np.ndarray) -> None:
    """Raise if any corner quadrilateral is inverted or self-intersecting.

    Args:
        corners: ``(..., 4, 2)`` corner feet in counter-clockwise order.
    """
    x, y = corners[..., 0], corners[..., 1]
    area = 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y, axis=-1)
    c1, c2, c3, c4 = (corners[..., q, :] for q in range(4))
    bad = (area <= 0.0) | _segments_cross(c1, c2, c3, c4) | _segments_cross(c2, c3, c4, c1)
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise CharacteristicCrossingError(
            "Upstream cell corners form an inverted or self-intersecting quadrilateral",
            cell=where,
        )


def traced_point_sets(mode: str, k: int) -> bool:
    """Whether edge midpoints and centres must be traced."""
    return mode == "qc" or k >= 2


@dataclass(frozen=True, eq=False)
class GridFeet:
    """Feet of every grid vertex, edge midpoint and cell centre for one step.

    Vertex feet are ``(nx + 1, ny + 1, 2)``; the last row and column are the first
    ones shifted by one period so neighbouring upstream cells share boundaries
    and the upstream cells tile one period exactly.
    """

    vertices: np.ndarray
    bottom_mids: Optional[np.ndarray] = None
    left_mids: Optional[np.ndarray] = None
    centers: Optional[np.ndarray] = None

    def corners(self) -> np.ndarray:
        v = self.vertices
        return np.stack([v[:-1, :-1], v[1:, :-1], v[1:, 1:], v[:-1, 1:]], axis=2)

    def midpoints(self) -> Optional[np.ndarray]:
        if self.bottom_mids is None:
            return None
        h, w = self.bottom_mids, self.left_mids
        return np.stack([h[:, :-1], w[1:, :], h[:, 1:], w[:-1, :]], axis=2)

    def cell(self, ix: int, iy: int, mode: str) -> UpstreamCell:
        v = self.vertices
        corners = np.stack([v[ix, iy], v[ix + 1, iy], v[ix + 1, iy + 1], v[ix, iy + 1]])
        mids = None
        if self.bottom_mids is not None:
            h, w = self.bottom_mids, self.left_mids
            mids = np.stack([h[ix, iy], w[ix + 1, iy], h[ix, iy + 1], w[ix, iy]])
        center = None if self.centers is None else self.centers[ix, iy]
        return UpstreamCell(
            cell=(ix, iy),
            mode=mode,
            corners=corners,
            midpoints=mids,
            center=center,
            edges=build_edges(corners, mode, mids),
        )


def _trace_points(field, x, y, t_end, dt, substeps, integrator):
    fx, fy = trace_feet_2d(field, x, y, t_end, t_end - dt, substeps, integrator)
    return np.stack([fx, fy], axis=-1)


def _snap(points: np.ndarray, mesh: Mesh2D) -> np.ndarray:
    out = points.copy()
    out[..., 0] = snap_to_grid(points[..., 0], mesh.mesh_x)
    out[..., 1] = snap_to_grid(points[..., 1], mesh.mesh_y)
    return out


def trace_grid_feet(
    mesh: Mesh2D,
    field: VelocityField2D,
    t_end: float,
    dt: float,
    with_midpoints: bool,
    substeps: int = 1,
    integrator: str = "rk4",
) -> GridFeet:
    """Trace all shared points of the mesh back from ``t_end`` to ``t_end - dt``."""
    xf = mesh.mesh_x.faces[:-1]
    yf = mesh.mesh_y.faces[:-1]
    lx, ly = mesh.mesh_x.length, mesh.mesh_y.length
    shift_x = np.array([lx, 0.0])
    shift_y = np.array([0.0, ly])

    gx, gy = np.meshgrid(xf, yf, indexing="ij")
    base = _trace_points(field, gx, gy, t_end, dt, substeps, integrator)
    vertices = np.empty((mesh.nx + 1, mesh.ny + 1, 2))
    vertices[:-1, :-1] = base
    vertices[-1, :-1] = base[0] + shift_x
    vertices[:-1, -1] = base[:, 0] + shift_y
    vertices[-1, -1] = base[0, 0] + shift_x + shift_y
    vertices = _snap(vertices, mesh)
    if not with_midpoints:
        return GridFeet(vertices=vertices)

    half_x, half_y = 0.5 * mesh.dx, 0.5 * mesh.dy
    h = _trace_points(field, gx + half_x, gy, t_end, dt, substeps, integrator)
    bottom = np.concatenate([h, (h[:, 0] + shift_y)[:, None]], axis=1)
    w = _trace_points(field, gx, gy + half_y, t_end, dt, substeps, integrator)
    left = np.concatenate([w, (w[0] + shift_x)[None]], axis=0)
    centers = _trace_points(field, gx + half_x, gy + half_y, t_end, dt, substeps, integrator)
    return GridFeet(
        vertices=vertices,
        bottom_mids=_snap(bottom, mesh),
        left_mids=_snap(left, mesh),
        centers=_snap(centers, mesh),
    )


def trace_upstream_cell(
    mesh: Mesh2D,
    cell: Tuple[int, int],
    field: VelocityField2D,
    t_end: float,
    dt: float,
    mode: str = "quad",
    substeps: int = 1,
    integrator: str = "rk4",
    k: int = 1,
) -> UpstreamCell:
    """Trace the corners (and, for qc mode or k = 2, midpoints and centre) of one cell.

    Raises:
        CharacteristicCrossingError: If the corner feet do not form a simple,
            positively oriented quadrilateral.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    ix, iy = cell
    xc = mesh.mesh_x.x_lo + (ix + 0.5) * mesh.dx
    yc = mesh.mesh_y.x_lo + (iy + 0.5) * mesh.dy
    refs = [CORNER_REF]
    extra = traced_point_sets(mode, k)
    if extra:
        refs += [MIDPOINT_REF, CENTER_REF]
    ref = np.vstack(refs)
    feet = _trace_points(
        field,
        xc + 0.5 * mesh.dx * ref[:, 0],
        yc + 0.5 * mesh.dy * ref[:, 1],
        t_end,
        dt,
        substeps,
        integrator,
    )
    feet = _snap(feet, mesh)
    corners = feet[:4]
    check_corner_quads(corners[None])
    mids = feet[4:8] if extra else None
    center = feet[8] if extra else None
    return UpstreamCell(
        cell=(int(ix), int(iy)),
        mode=mode,
        corners=corners,
        midpoints=mids,
        center=center,
        edges=build_edges(corners, mode, mids),
    )


def estimate_substeps(mesh: Mesh2D, field: VelocityField2D, t_end: float, dt: float) -> int:
    """``max(1, ceil(CFL))`` with the CFL measured at the grid vertices at ``t_end``."""
    gx, gy = np.meshgrid(mesh.mesh_x.faces[:-1], mesh.mesh_y.faces[:-1], indexing="ij")
    a, b = field.velocity(gx, gy, t_end)
    cfl = float(np.max(np.abs(a) / mesh.dx + np.abs(b) / mesh.dy)) * dt
    return max(1, int(math.ceil(cfl - 1e-12)))
