"""Tests for backward characteristic tracing.

This file contains tests for:
- Analytic 1D and 2D fields
- Substep and integrator handling
- Snapshot fields reconstructed in time
"""

import math

import numpy as np
import pytest

from sldg.errors import TraceError
from sldg.trace import (
    AnalyticField2D,
    SnapshotField2D,
    default_substeps,
    trace_back_1d,
    trace_back_2d,
    trace_feet_1d,
    trace_feet_2d,
)


class UniformSnapshot:
    """Frozen uniform velocity, the smallest VelocitySnapshot."""

    def __init__(self, a, b):
        self.a, self.b = a, b

    def velocity(self, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, self.a), np.full(shape, self.b)


# ============================================================================
# Analytic Field Tests
# ============================================================================
# Constant, linear and rotating velocities with known feet


def test_trace_back_1d_constant_speed():
    """Test that a constant speed gives x - a * dt and the feet are unwrapped."""
    point = trace_back_1d(lambda x, t: np.full_like(x, 2.0), 0.5, 1.0, 0.0)
    assert point.end == (0.5,)
    assert point.foot[0] == pytest.approx(-1.5)


def test_trace_back_1d_linear_speed():
    """Test dx/dt = x against x * exp(-dt) with RK4 substeps."""
    point = trace_back_1d(lambda x, t: x, 1.0, 1.0, 0.0, substeps=10)
    assert point.foot[0] == pytest.approx(math.exp(-1.0), rel=1e-5)


def test_trace_back_1d_time_dependent_speed():
    """Test dx/dt = t, whose foot is exact under RK4."""
    point = trace_back_1d(lambda x, t: np.full_like(x, t), 0.0, 2.0, 0.0)
    assert point.foot[0] == pytest.approx(-2.0, abs=1e-14)


def test_trace_back_2d_rotation_is_exact_enough():
    """Test that RK4 traces a quarter turn of a rigid rotation accurately."""
    field = AnalyticField2D(lambda x, y, t: (-y, x))
    point = trace_back_2d(field, (1.0, 0.0), 0.5 * math.pi, 0.0, substeps=20)
    assert point.foot[0] == pytest.approx(0.0, abs=1e-5)
    assert point.foot[1] == pytest.approx(-1.0, abs=1e-5)


def test_trace_feet_zero_span_returns_copy():
    """Test that tracing over an empty interval returns the end points."""
    x = np.array([0.1, 0.2])
    feet = trace_feet_1d(lambda x, t: x, x, 1.0, 1.0)
    np.testing.assert_array_equal(feet, x)
    assert feet is not x


def test_euler_integrator_is_first_order():
    """Test that Euler tracing of dx/dt = x gives x (1 - dt)."""
    feet = trace_feet_1d(lambda x, t: x, np.array([2.0]), 0.1, 0.0, integrator="euler")
    assert feet[0] == pytest.approx(2.0 * 0.9)


def test_trace_rejects_forward_span():
    """Test that t_start must not exceed t_end."""
    with pytest.raises(ValueError):
        trace_feet_1d(lambda x, t: x, np.array([0.0]), 0.0, 1.0)


def test_trace_rejects_unknown_integrator():
    """Test that only rk4 and euler are accepted."""
    field = AnalyticField2D(lambda x, y, t: (x, y))
    with pytest.raises(ValueError):
        trace_feet_2d(field, np.zeros(2), np.zeros(2), 1.0, 0.0, integrator="midpoint")


def test_trace_rejects_zero_substeps():
    """Test that at least one substep is required."""
    with pytest.raises(ValueError):
        trace_feet_1d(lambda x, t: x, np.array([0.0]), 1.0, 0.0, substeps=0)


@pytest.mark.parametrize("cfl,expected", [(0.3, 1), (1.0, 1), (1.2, 2), (10.0, 10)])
def test_default_substeps(cfl, expected):
    """Test the substep default max(1, ceil(CFL))."""
    assert default_substeps(cfl) == expected


def test_analytic_field_broadcasts_constants():
    """Test that scalar components broadcast to the point shape."""
    field = AnalyticField2D(lambda x, y, t: (1.0, 0.0))
    a, b = field.velocity(np.zeros((3, 2)), np.zeros((3, 2)), 0.0)
    assert a.shape == (3, 2)
    assert np.all(b == 0.0)


# ============================================================================
# Snapshot Field Tests
# ============================================================================
# Frozen, linear and quadratic reconstruction in time


def test_snapshot_constant_rule():
    """Test that one snapshot is frozen at every time."""
    field = SnapshotField2D([(0.0, UniformSnapshot(1.0, 2.0))])
    a, b = field.velocity(np.zeros(2), np.zeros(2), 5.0)
    np.testing.assert_allclose(a, 1.0)
    np.testing.assert_allclose(b, 2.0)
    assert field.rule == "constant"


def test_snapshot_linear_interpolation():
    """Test linear-in-time interpolation between two snapshots."""
    field = SnapshotField2D([(1.0, UniformSnapshot(3.0, 0.0)), (0.0, UniformSnapshot(1.0, 0.0))])
    a, _ = field.velocity(np.zeros(1), np.zeros(1), 0.25)
    assert a[0] == pytest.approx(1.5)
    assert field.time_span == (0.0, 1.0)


def test_snapshot_quadratic_reproduces_parabola():
    """Test that three snapshots of t^2 interpolate it exactly."""
    snaps = [(t, UniformSnapshot(t**2, 0.0)) for t in (0.0, 0.5, 1.0)]
    field = SnapshotField2D(snaps)
    a, _ = field.velocity(np.zeros(1), np.zeros(1), 0.3)
    assert a[0] == pytest.approx(0.09)
    assert field.rule == "quadratic"


def test_snapshot_outside_span_raises():
    """Test that interpolated fields refuse times outside their span."""
    field = SnapshotField2D([(0.0, UniformSnapshot(0.0, 0.0)), (1.0, UniformSnapshot(1.0, 0.0))])
    with pytest.raises(TraceError):
        field.velocity(np.zeros(1), np.zeros(1), 1.5)


def test_snapshot_rejects_rule_mismatch():
    """Test that the rule must match the number of snapshots."""
    with pytest.raises(ValueError):
        SnapshotField2D([(0.0, UniformSnapshot(0.0, 0.0))], rule="linear")
    with pytest.raises(ValueError):
        SnapshotField2D([(0.0, UniformSnapshot(0.0, 0.0)), (0.0, UniformSnapshot(1.0, 0.0))])


def test_trace_through_linear_snapshot_field():
    """Test tracing in a field that grows linearly in time from 0 to 1."""
    field = SnapshotField2D([(0.0, UniformSnapshot(0.0, 0.0)), (1.0, UniformSnapshot(1.0, 1.0))])
    point = trace_back_2d(field, (0.0, 0.0), 1.0, 0.0)
    # x(1) - x(0) = ∫ t dt = 1/2
    assert point.foot[0] == pytest.approx(-0.5)
    assert point.foot[1] == pytest.approx(-0.5)
