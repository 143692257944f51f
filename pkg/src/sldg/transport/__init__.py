"""Semi-Lagrangian DG transport steps: 1D lines, Strang splitting and non-splitting 2D."""

from .clipping import SubRegion, clip_upstream, subregion_area
from .green import TestPolyStar2D, green_integral, reconstruct_test_poly
from .nonsplit import step_2d
from .sldg1d import (
    TestPolyStar1D,
    UpstreamInterval,
    advance_lines,
    build_upstream_interval,
    interpolate_test_poly,
    step_1d,
)
from .split import LineFamily, extract_lines, insert_lines, strang_step, sweep
from .upstream import UpstreamCell, trace_upstream_cell

__all__ = [
    "LineFamily",
    "SubRegion",
    "TestPolyStar1D",
    "TestPolyStar2D",
    "UpstreamCell",
    "UpstreamInterval",
    "advance_lines",
    "build_upstream_interval",
    "clip_upstream",
    "extract_lines",
    "green_integral",
    "insert_lines",
    "interpolate_test_poly",
    "reconstruct_test_poly",
    "step_1d",
    "step_2d",
    "strang_step",
    "subregion_area",
    "sweep",
    "trace_upstream_cell",
]
