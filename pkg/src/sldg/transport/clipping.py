"""Decomposition of an upstream cell into its overlaps with background cells.

Boundaries are first cut into atomic pieces at every crossed grid line, so each
piece lies in a single background cell. The cut boundary is then clipped with
Sutherland-Hodgman half-plane passes, vertical grid lines first and horizontal
grid lines second; the gaps left by discarded pieces are closed with straight
connectors along the clip line. Curved pieces are split at the turning points
of their coordinates, so every crossing sits on a monotone span and is found by
a bracketing root search.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..errors import GeometryError
from ..mesh import GEOM_TOL, Mesh1D, Mesh2D
from .upstream import Point, Segment, UpstreamCell

_PARAM_TOL = 1e-13
# brentq refuses rtol below 4 eps
_ROOT_XTOL = 1e-15
_ROOT_RTOL = 4.0 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class SubRegion:
    """Overlap of an upstream cell with background cell ``cell`` (unwrapped indices).

    ``segments`` is a closed, counter-clockwise chain of straight and curved pieces.
    """

    cell: Tuple[int, int]
    segments: Tuple[Segment, ...]

    def wrapped(self, mesh: Mesh2D) -> Tuple[int, int]:
        return (self.cell[0] % mesh.nx, self.cell[1] % mesh.ny)

    @property
    def area(self) -> float:
        return polygon_area(self.segments)

    def closure_gap(self) -> float:
        """Largest gap between consecutive segment endpoints."""
        segs = self.segments
        return max(
            math.hypot(segs[i].end[0] - segs[(i + 1) % len(segs)].start[0],
                       segs[i].end[1] - segs[(i + 1) % len(segs)].start[1])
            for i in range(len(segs))
        )


_GAUSS3 = np.polynomial.legendre.leggauss(3)


def polygon_area(segments: Sequence[Segment]) -> float:
    """Signed area enclosed by a closed chain, as the boundary integral of x dy."""
    total = 0.0
    for seg in segments:
        if seg.curve is None:
            total += 0.5 * (seg.start[0] + seg.end[0]) * (seg.end[1] - seg.start[1])
            continue
        (c0, c1, c2), lo, hi = seg.curve, seg.s_lo, seg.s_hi
        s = lo + 0.5 * (hi - lo) * (_GAUSS3[0] + 1.0)
        x = c0[0] + s * (c1[0] + s * c2[0])
        dy = c1[1] + 2.0 * s * c2[1]
        total += 0.5 * (hi - lo) * float(np.dot(_GAUSS3[1], x * dy))
    return total


def _lines_between(lo: float, hi: float, mesh: Mesh1D) -> List[float]:
    """Grid lines strictly inside (lo, hi), away from the endpoints by the tolerance."""
    eps = mesh.eps
    first = math.floor((lo - mesh.x_lo) / mesh.dx) + 1
    last = math.ceil((hi - mesh.x_lo) / mesh.dx) - 1
    values = (mesh.x_lo + i * mesh.dx for i in range(first, last + 1))
    return [v for v in values if lo + eps < v < hi - eps]


def _line_crossings(seg: Segment, mesh: Mesh1D, axis: int) -> List[Tuple[float, float]]:
    """(parameter in [0, 1], line value) for grid lines crossed by a straight segment."""
    a, b = seg.start[axis], seg.end[axis]
    lo, hi = (a, b) if a < b else (b, a)
    return [((v - a) / (b - a), v) for v in _lines_between(lo, hi, mesh)]


def _curve_coord(seg: Segment, axis: int, s: float) -> float:
    c0, c1, c2 = seg.curve
    return c0[axis] + s * (c1[axis] + s * c2[axis])


def _curve_crossings(
    seg: Segment, mesh: Mesh1D, axis: int, cell: Tuple[int, int]
) -> List[Tuple[float, float]]:
    """(curve parameter, line value) for grid lines crossed by a curved segment."""
    _, c1, c2 = seg.curve
    spans = [seg.s_lo, seg.s_hi]
    if c2[axis] != 0.0:
        turn = -c1[axis] / (2.0 * c2[axis])
        if seg.s_lo + _PARAM_TOL < turn < seg.s_hi - _PARAM_TOL:
            spans = [seg.s_lo, turn, seg.s_hi]
    out = []
    for s_a, s_b in zip(spans[:-1], spans[1:]):
        v_a = seg.start[axis] if s_a == seg.s_lo else _curve_coord(seg, axis, s_a)
        v_b = seg.end[axis] if s_b == seg.s_hi else _curve_coord(seg, axis, s_b)
        lo, hi = (v_a, v_b) if v_a < v_b else (v_b, v_a)
        for v in _lines_between(lo, hi, mesh):
            try:
                s = brentq(
                    lambda t: _curve_coord(seg, axis, t) - v,
                    s_a,
                    s_b,
                    xtol=_ROOT_XTOL,
                    rtol=_ROOT_RTOL,
                )
            except ValueError as e:
                raise GeometryError(
                    f"Could not bracket the crossing of a curved edge with grid line {v}", cell
                ) from e
            out.append((s, v))
    return out


def subdivide(
    seg: Segment, mesh: Mesh2D, cell: Tuple[int, int] = None, axes: Tuple[int, ...] = (0, 1)
) -> List[Segment]:
    """Cut a segment at every vertical (axis 0) and horizontal (axis 1) grid line it crosses.

    Crossing points are snapped exactly onto their grid line.
    """
    meshes = (mesh.mesh_x, mesh.mesh_y)
    cuts = []
    for axis in axes:
        if seg.curve is None:
            found = _line_crossings(seg, meshes[axis], axis)
        else:
            found = _curve_crossings(seg, meshes[axis], axis, cell)
        cuts.extend((s, axis, v) for s, v in found)
    if not cuts:
        return [seg]

    cuts.sort(key=lambda item: item[0])
    merged: List[Tuple[float, dict]] = []
    for s, axis, v in cuts:
        if merged and abs(s - merged[-1][0]) <= _PARAM_TOL:
            merged[-1][1][axis] = v
        else:
            merged.append((s, {axis: v}))

    points: List[Point] = []
    params: List[float] = []
    for s, snaps in merged:
        x, y = seg.point(s)
        points.append((snaps.get(0, x), snaps.get(1, y)))
        params.append(s)

    pieces = []
    start, s_start = seg.start, (seg.s_lo if seg.curve is not None else 0.0)
    for p, s in zip(points + [seg.end], params + [seg.s_hi if seg.curve is not None else 1.0]):
        if seg.curve is None:
            pieces.append(Segment(start=start, end=p))
        else:
            pieces.append(Segment(start=start, end=p, curve=seg.curve, s_lo=s_start, s_hi=s))
        start, s_start = p, s
    return pieces


def _inside(seg: Segment, axis: int, value: float, keep_upper: bool, eps: float) -> bool:
    m = seg.midpoint()[axis]
    return m >= value - eps if keep_upper else m <= value + eps


def _connector(a: Point, b: Point, eps: float) -> List[Segment]:
    if abs(a[0] - b[0]) <= eps and abs(a[1] - b[1]) <= eps:
        return []
    return [Segment(start=a, end=b)]


def clip_half_plane(
    segments: Sequence[Segment], axis: int, value: float, keep_upper: bool, eps: float
) -> List[Segment]:
    """Sutherland-Hodgman clip of a closed atomic chain against one grid line.

    Pieces are classified by their midpoint; pieces on the line count as
    inside. Gaps are closed along the clip line.
    """
    flags = [_inside(s, axis, value, keep_upper, eps) for s in segments]
    if all(flags):
        return list(segments)
    if not any(flags):
        return []
    n = len(segments)
    first = next(i for i in range(n) if flags[i] and not flags[i - 1])
    out: List[Segment] = []
    exit_point = None
    for offset in range(n):
        i = (first + offset) % n
        seg = segments[i]
        if flags[i]:
            if exit_point is not None:
                out.extend(_connector(exit_point, seg.start, eps))
                exit_point = None
            out.append(seg)
        elif exit_point is None:
            exit_point = out[-1].end
    if exit_point is not None:
        out.extend(_connector(exit_point, out[0].start, eps))
    return out


def _index_range(values: Sequence[float], mesh: Mesh1D) -> Tuple[int, int]:
    t_lo = (min(values) - mesh.x_lo) / mesh.dx
    t_hi = (max(values) - mesh.x_lo) / mesh.dx
    r_lo, r_hi = round(t_lo), round(t_hi)
    if abs(t_lo - r_lo) <= GEOM_TOL * max(1.0, abs(r_lo)):
        t_lo = r_lo
    if abs(t_hi - r_hi) <= GEOM_TOL * max(1.0, abs(r_hi)):
        t_hi = r_hi
    first = math.floor(t_lo)
    last = max(first, math.ceil(t_hi) - 1)
    return first, last


def _chain_coords(segments: Sequence[Segment], axis: int) -> List[float]:
    coords = []
    for seg in segments:
        coords.append(seg.start[axis])
        if seg.curve is not None:
            coords.append(seg.midpoint()[axis])
    return coords


def clip_upstream(uc: UpstreamCell, mesh: Mesh2D) -> List[SubRegion]:
    """Split an upstream cell into subregions, one per overlapped background cell.

    Returns subregions ordered by (l_x, l_y); slivers with area below the
    geometric tolerance times the cell area are dropped.

    Raises:
        GeometryError: If a curved edge crossing cannot be bracketed.
    """
    eps = mesh.eps
    atomic: List[Segment] = []
    for edge in uc.edges:
        atomic.extend(subdivide(edge, mesh, uc.cell))

    lx0, lx1 = _index_range(_chain_coords(atomic, 0), mesh.mesh_x)
    ly0, ly1 = _index_range(_chain_coords(atomic, 1), mesh.mesh_y)
    min_area = GEOM_TOL * mesh.cell_area

    if lx0 == lx1 and ly0 == ly1:
        return [SubRegion(cell=(lx0, ly0), segments=tuple(atomic))]

    regions: List[SubRegion] = []
    x_lo, y_lo = mesh.mesh_x.x_lo, mesh.mesh_y.x_lo
    for lx in range(lx0, lx1 + 1):
        strip = atomic
        if lx0 != lx1:
            strip = clip_half_plane(strip, 0, x_lo + lx * mesh.dx, True, eps)
            strip = clip_half_plane(strip, 0, x_lo + (lx + 1) * mesh.dx, False, eps)
            if not strip:
                continue
            cut: List[Segment] = []
            for seg in strip:
                cut.extend(subdivide(seg, mesh, uc.cell, axes=(1,)) if seg.curve is None else [seg])
            strip = cut
        for ly in range(ly0, ly1 + 1):
            row = strip
            if ly0 != ly1:
                row = clip_half_plane(row, 1, y_lo + ly * mesh.dy, True, eps)
                row = clip_half_plane(row, 1, y_lo + (ly + 1) * mesh.dy, False, eps)
            if row and polygon_area(row) > min_area:
                regions.append(SubRegion(cell=(lx, ly), segments=tuple(row)))
    return regions


def subregion_area(sr: SubRegion) -> float:
    """Area of a subregion from its boundary."""
    return sr.area
