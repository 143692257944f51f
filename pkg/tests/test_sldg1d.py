"""Tests for the one-dimensional SLDG step.

This file contains tests for:
- Upstream intervals and adjoint test polynomials
- Exactness, mass conservation and accuracy of step_1d
- Crossing detection
- The batched line kernel
"""

import math

import numpy as np
import pytest

from sldg.basis import gauss_legendre
from sldg.errors import CharacteristicCrossingError
from sldg.mesh import build_mesh_1d
from sldg.solution import Solution1D
from sldg.transport import advance_lines, build_upstream_interval, interpolate_test_poly, step_1d


def unit_speed(x, t):
    return np.ones_like(x)


def l2_error_1d(u, exact):
    """sqrt(∫ (u - exact)^2 dx) with 6 Gauss points per cell."""
    rule = gauss_legendre(6)
    mesh = u.mesh
    x = mesh.faces[:-1, None] + 0.5 * mesh.dx * (rule.nodes[None, :] + 1.0)
    err = u.evaluate(x) - exact(x)
    return math.sqrt(float(np.sum(err**2 * rule.weights) * 0.5 * mesh.dx))


def run_1d(u, field, final_time, n_steps):
    dt = final_time / n_steps
    for _ in range(n_steps):
        u = step_1d(u, field, dt)
    return u


# ============================================================================
# Upstream Interval Tests
# ============================================================================
# Traced feet, subinterval decomposition and interpolated test functions


def test_upstream_interval_half_cell_shift(mesh_1d):
    """Test that a half-cell shift splits the upstream interval into two pieces."""
    dt = 0.5 * mesh_1d.dx
    up = build_upstream_interval(mesh_1d, 3, unit_speed, 1.0, dt, k=2)
    assert up.left_foot == pytest.approx(mesh_1d.faces[3] - dt)
    assert up.right_foot == pytest.approx(mesh_1d.faces[4] - dt)
    assert [cell for _, _, cell in up.subintervals] == [2, 3]
    total = sum(hi - lo for lo, hi, _ in up.subintervals)
    assert total == pytest.approx(mesh_1d.dx)


def test_upstream_interval_unwrapped_at_left_boundary(mesh_1d):
    """Test that feet leaving the domain stay unwrapped with negative cell indices."""
    up = build_upstream_interval(mesh_1d, 0, unit_speed, 0.0, 1.5 * mesh_1d.dx, k=1)
    assert up.left_foot < mesh_1d.x_lo
    assert [cell for _, _, cell in up.subintervals] == [-2, -1]


def test_interpolated_test_poly_matches_shifted_basis(mesh_1d):
    """Test that Psi* under a constant shift is the shifted Legendre function."""
    dt = 0.3 * mesh_1d.dx
    up = build_upstream_interval(mesh_1d, 5, unit_speed, 0.0, dt, k=2)
    psi = interpolate_test_poly(up, 2)
    x = np.linspace(up.left_foot, up.right_foot, 9)
    xi = 2.0 * (x - up.left_foot) / mesh_1d.dx - 1.0
    np.testing.assert_allclose(psi(x), 0.5 * (3.0 * xi**2 - 1.0), atol=1e-12)
    assert psi.degree == 2


def test_interpolated_test_poly_from_coefficients(mesh_1d):
    """Test that modal coefficients give the matching combination of test functions."""
    up = build_upstream_interval(mesh_1d, 2, unit_speed, 0.0, 0.2 * mesh_1d.dx, k=1)
    psi = interpolate_test_poly(up, np.array([1.0, 2.0]))
    assert psi(up.left_foot) == pytest.approx(-1.0)
    assert psi(up.right_foot) == pytest.approx(3.0)


# ============================================================================
# Step Tests
# ============================================================================
# Exactness for integer shifts, conservation and convergence


@pytest.mark.parametrize("k", [1, 2, 3])
def test_integer_shift_is_exact(mesh_1d, k):
    """Test that a shift by whole cells moves the coefficients exactly."""
    u = Solution1D.project(np.sin, mesh_1d, k)
    v = step_1d(u, unit_speed, 2.0 * mesh_1d.dx)
    np.testing.assert_allclose(v.coeffs, np.roll(u.coeffs, 2, axis=0), atol=1e-12)
    assert v.time == pytest.approx(2.0 * mesh_1d.dx)


def test_step_conserves_mass_variable_speed(mesh_1d):
    """Test mass conservation for a variable, positive speed."""
    u = Solution1D.project(lambda x: 1.0 + 0.5 * np.cos(x), mesh_1d, 2)
    field = lambda x, t: 1.5 + np.sin(x)
    v = step_1d(u, field, 0.4)
    assert v.mass == pytest.approx(u.mass, rel=1e-12)


def test_large_cfl_step(mesh_1d):
    """Test that a CFL of 5.3 stays accurate for constant speed."""
    u = Solution1D.project(np.sin, mesh_1d, 2)
    dt = 5.3 * mesh_1d.dx
    v = step_1d(u, unit_speed, dt)
    assert l2_error_1d(v, lambda x: np.sin(x - dt)) < 2e-3
    assert v.mass == pytest.approx(u.mass, abs=1e-12)


def test_zero_step_returns_copy(sine_1d):
    """Test that dt = 0 leaves the coefficients unchanged."""
    v = step_1d(sine_1d, unit_speed, 0.0)
    np.testing.assert_array_equal(v.coeffs, sine_1d.coeffs)
    assert v.coeffs is not sine_1d.coeffs


def test_crossing_characteristics_raise(mesh_1d):
    """Test that non-monotone Euler feet are reported as crossing."""
    u = Solution1D.project(np.sin, mesh_1d, 2)
    field = lambda x, t: 5.0 * np.sin(x)
    with pytest.raises(CharacteristicCrossingError):
        step_1d(u, field, 1.0, substeps=1, integrator="euler")


def test_spatial_convergence_order():
    """Test third-order convergence of P^2 for constant-speed transport at a fixed step count."""
    errors = []
    for n in (20, 40):
        mesh = build_mesh_1d((0.0, 2.0 * math.pi), n)
        u = run_1d(Solution1D.project(np.sin, mesh, 2), unit_speed, 0.5, 2)
        errors.append(l2_error_1d(u, lambda x: np.sin(x - 0.5)))
    order = math.log(errors[0] / errors[1]) / math.log(2.0)
    assert order > 2.5


# ============================================================================
# Batched Line Tests
# ============================================================================
# advance_lines on several independent lines


def test_advance_lines_matches_single_steps(mesh_1d):
    """Test that a batch of lines gives the same result as separate steps."""
    shifts = [0.0, 0.7, 1.9]
    lines = np.stack(
        [Solution1D.project(lambda x, s=s: np.sin(x + s), mesh_1d, 2).coeffs for s in shifts]
    )
    speeds = np.array([1.0, -0.5, 2.0])[:, None]
    field = lambda x, t: np.broadcast_to(speeds, x.shape)
    batched = advance_lines(mesh_1d, lines, field, 0.0, 0.3, substeps=1)
    for i, s in enumerate(speeds[:, 0]):
        single = Solution1D(mesh=mesh_1d, k=2, coeffs=lines[i])
        expected = step_1d(single, lambda x, t, s=s: np.full_like(x, s), 0.3, substeps=1)
        np.testing.assert_allclose(batched[i], expected.coeffs, atol=1e-13)


def test_advance_lines_rejects_cell_mismatch(mesh_1d):
    """Test that coefficient arrays must match the mesh."""
    with pytest.raises(ValueError):
        advance_lines(mesh_1d, np.zeros((2, 15, 3)), unit_speed, 0.0, 0.1)
