"""Tests for the periodic LDG Poisson solvers.

This file contains tests for:
- The 1D potential and electric field
- The 2D stream function and velocity for both sign conventions
- Compatibility checks and the bounded solver cache
- Linear-system residuals and convergence orders
"""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from sldg.errors import PoissonCompatibilityError
from sldg.mesh import build_mesh_1d, build_mesh_2d
from sldg.poisson import (
    SOLVER_CACHE_SIZE,
    PoissonSolver1D,
    PoissonSolver2D,
    get_solver,
    relative_residual,
    solve_poisson_1d,
    solve_poisson_2d,
)
from sldg.solution import Solution1D, Solution2D


@pytest.fixture
def fine_mesh_1d():
    return build_mesh_1d((0.0, 2.0 * math.pi), 64)


@pytest.fixture
def fine_mesh_2d():
    return build_mesh_2d((0.0, 2.0 * math.pi), (0.0, 2.0 * math.pi), 16, 16)


def product(x, y):
    return np.sin(x) * np.sin(y)


# ============================================================================
# 1D Solver Tests
# ============================================================================
# -phi'' = rho with E = -phi_x


def test_poisson_1d_sine_source(fine_mesh_1d):
    """Test that rho = sin x gives phi = sin x and E = -cos x."""
    rho = Solution1D.project(np.sin, fine_mesh_1d, 2)
    field = solve_poisson_1d(rho, 2)
    phi_exact = Solution1D.project(np.sin, fine_mesh_1d, 2)
    e_exact = Solution1D.project(lambda x: -np.cos(x), fine_mesh_1d, 2)
    assert field.phi.with_coeffs(field.phi.coeffs - phi_exact.coeffs).l2_norm < 1e-4
    assert field.efield.with_coeffs(field.efield.coeffs - e_exact.coeffs).l2_norm < 1e-4
    x = np.array([0.2, 1.0, 3.3, 6.0])
    np.testing.assert_allclose(field.electric_field(x), -np.cos(x), atol=1e-4)


def test_poisson_1d_potential_has_zero_mean(fine_mesh_1d):
    """Test that the Lagrange multiplier pins the potential mean to zero."""
    rho = Solution1D.project(lambda x: np.cos(3.0 * x), fine_mesh_1d, 1)
    field = solve_poisson_1d(rho, 1)
    assert field.phi.mass == pytest.approx(0.0, abs=1e-12)


def test_poisson_1d_field_energy(fine_mesh_1d):
    """Test that ∫ E^2 of E = -cos x is pi."""
    rho = Solution1D.project(np.sin, fine_mesh_1d, 2)
    assert solve_poisson_1d(rho, 2).energy == pytest.approx(math.pi, rel=1e-3)


def test_poisson_1d_degree_differs_from_source(fine_mesh_1d):
    """Test that the source is truncated to the solver degree."""
    rho = Solution1D.project(np.sin, fine_mesh_1d, 3)
    field = solve_poisson_1d(rho, 1)
    assert field.r == 1
    assert field.phi.coeffs.shape == (64, 2)


def test_poisson_1d_rejects_nonzero_mean(fine_mesh_1d):
    """Test that a source with nonzero mean is incompatible."""
    rho = Solution1D.project(lambda x: 1.0 + np.sin(x), fine_mesh_1d, 1)
    with pytest.raises(PoissonCompatibilityError):
        solve_poisson_1d(rho, 1)


def test_poisson_1d_rejects_negative_degree(fine_mesh_1d):
    """Test that the degree must be non-negative."""
    with pytest.raises(ValueError):
        PoissonSolver1D(fine_mesh_1d, -1)


# ============================================================================
# 2D Solver Tests
# ============================================================================
# Stream function and velocity (-Phi_y, Phi_x)


@pytest.mark.parametrize("space", ["P", "Q"])
def test_poisson_2d_guiding_center(fine_mesh_2d, space):
    """Test that -Laplace Phi = sin x sin y gives Phi = sin x sin y / 2 in P^2."""
    rho = Solution2D.project(product, fine_mesh_2d, 2, space)
    field = solve_poisson_2d(rho, "guiding", 2)
    assert field.phi.space == "P"
    exact = Solution2D.project(lambda x, y: 0.5 * product(x, y), fine_mesh_2d, 2, "P")
    assert field.phi.with_coeffs(field.phi.coeffs - exact.coeffs).l2_norm < 1e-2
    x = np.array([0.5, 2.0, 4.1])
    y = np.array([1.2, 5.5, 3.0])
    u, v = field.velocity(x, y)
    np.testing.assert_allclose(u, -0.5 * np.sin(x) * np.cos(y), atol=1e-2)
    np.testing.assert_allclose(v, 0.5 * np.cos(x) * np.sin(y), atol=1e-2)


def test_poisson_2d_euler_flips_sign(fine_mesh_2d):
    """Test that Laplace Phi = omega is the guiding-centre solution negated."""
    s = Solution2D.project(product, fine_mesh_2d, 1, "Q")
    guiding = solve_poisson_2d(s, "guiding", 1)
    euler = solve_poisson_2d(s, "euler", 1)
    np.testing.assert_allclose(euler.phi.coeffs, -guiding.phi.coeffs, atol=1e-13)
    np.testing.assert_allclose(euler.velocity_x.coeffs, -guiding.velocity_x.coeffs, atol=1e-13)


def test_poisson_2d_speed_and_energy(fine_mesh_2d):
    """Test the maximal speeds and the kinetic energy pi^2 / 2."""
    rho = Solution2D.project(product, fine_mesh_2d, 2, "Q")
    field = solve_poisson_2d(rho, "guiding", 2)
    max_u, max_v = field.max_speed
    assert max_u == pytest.approx(0.5, abs=2e-2)
    assert max_v == pytest.approx(0.5, abs=2e-2)
    assert field.kinetic_energy == pytest.approx(0.5 * math.pi**2, rel=1e-2)


def test_poisson_2d_keeps_time(fine_mesh_2d):
    """Test that the field carries the time of its source."""
    rho = Solution2D.project(product, fine_mesh_2d, 1, "P", time=0.7)
    assert solve_poisson_2d(rho, "guiding", 1).phi.time == 0.7


def test_poisson_2d_rejects_nonzero_mean(fine_mesh_2d):
    """Test that a source with nonzero mean is incompatible."""
    s = Solution2D.project(lambda x, y: 1.0 + product(x, y), fine_mesh_2d, 1, "P")
    with pytest.raises(PoissonCompatibilityError):
        solve_poisson_2d(s, "euler", 1)


def test_poisson_2d_rejects_sign(fine_mesh_2d):
    """Test that only the euler and guiding conventions exist."""
    s = Solution2D.project(product, fine_mesh_2d, 1, "P")
    with pytest.raises(ValueError):
        solve_poisson_2d(s, "poisson", 1)


def test_poisson_2d_rejects_space(fine_mesh_2d):
    """Test that the 2D solver needs P or Q."""
    with pytest.raises(ValueError):
        PoissonSolver2D(fine_mesh_2d, 1, "1D")


# ============================================================================
# Cache Tests
# ============================================================================
# One factorisation per (mesh, degree, space)


def test_get_solver_is_cached(fine_mesh_1d, fine_mesh_2d):
    """Test that repeated lookups return the same factorised solver."""
    assert get_solver(fine_mesh_2d, 1, "Q") is get_solver(fine_mesh_2d, 1, "Q")
    assert get_solver(fine_mesh_2d, 1, "Q") is not get_solver(fine_mesh_2d, 1, "P")
    assert isinstance(get_solver(fine_mesh_1d, 1), PoissonSolver1D)


def test_get_solver_cache_is_bounded():
    """Test that the cache keeps only the most recent factorisations."""
    get_solver.cache_clear()
    mesh = build_mesh_1d((0.0, 1.0), 4)
    first = get_solver(mesh, 0)
    for r in range(1, SOLVER_CACHE_SIZE + 1):
        get_solver(mesh, r)
    info = get_solver.cache_info()
    assert info.maxsize == SOLVER_CACHE_SIZE
    assert info.currsize == SOLVER_CACHE_SIZE
    assert get_solver(mesh, 0) is not first
    assert get_solver(mesh, SOLVER_CACHE_SIZE) is get_solver(mesh, SOLVER_CACHE_SIZE)


# ============================================================================
# Residual Tests
# ============================================================================
# Backward error of the bordered linear system


def test_poisson_1d_reports_small_residual(fine_mesh_1d):
    """Test that the 1D solve reaches a relative residual of 1e-12."""
    rho = Solution1D.project(lambda x: np.sin(x) + 0.3 * np.cos(5.0 * x), fine_mesh_1d, 2)
    field = solve_poisson_1d(rho, 2)
    assert 0.0 <= field.residual <= 1e-12


@pytest.mark.parametrize("space", ["P", "Q"])
def test_poisson_2d_reports_small_residual(fine_mesh_2d, space):
    """Test that the 2D solve reaches a relative residual of 1e-12."""
    rho = Solution2D.project(lambda x, y: product(x, y) + np.cos(2.0 * x), fine_mesh_2d, 2, "Q")
    field = solve_poisson_2d(rho, "guiding", 2, space=space)
    assert field.phi.space == space
    assert 0.0 <= field.residual <= 1e-12


def test_relative_residual_detects_wrong_solution():
    """Test that the residual measure sees a perturbed solution."""
    A = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 3.0]]))
    b = np.array([3.0, 4.0])
    assert relative_residual(A, np.array([1.0, 1.0]), b) == 0.0
    assert relative_residual(A, np.array([1.0, 1.1]), b) == pytest.approx(0.3 / (4.0 * 1.1 + 4.0))


# ============================================================================
# Convergence Tests
# ============================================================================
# Order r + 1 on smooth periodic solutions


def observed_orders(errors, sizes):
    return [
        math.log(errors[i - 1] / errors[i]) / math.log(sizes[i] / sizes[i - 1])
        for i in range(1, len(errors))
    ]


@pytest.mark.parametrize("r", [1, 2])
def test_poisson_1d_converges_at_order_r_plus_one(r):
    """Test that phi and E converge at order r + 1 under mesh refinement."""
    sizes = [8, 16, 32]
    phi_errors, e_errors = [], []
    for n in sizes:
        mesh = build_mesh_1d((0.0, 2.0 * math.pi), n)
        source = lambda x: np.sin(x) + 4.0 * np.cos(2.0 * x)
        field = solve_poisson_1d(Solution1D.project(source, mesh, r), r)
        phi = Solution1D.project(lambda x: np.sin(x) + np.cos(2.0 * x), mesh, r)
        e = Solution1D.project(lambda x: -np.cos(x) + 2.0 * np.sin(2.0 * x), mesh, r)
        phi_errors.append(field.phi.with_coeffs(field.phi.coeffs - phi.coeffs).l2_norm)
        e_errors.append(field.efield.with_coeffs(field.efield.coeffs - e.coeffs).l2_norm)
    assert observed_orders(phi_errors, sizes)[-1] > r + 0.8
    assert observed_orders(e_errors, sizes)[-1] > r + 0.8


@pytest.mark.parametrize("r", [1, pytest.param(2, marks=pytest.mark.slow)])
def test_poisson_2d_converges_at_order_r_plus_one(r):
    """Test that the P^r stream function converges at order r + 1."""
    sizes = [8, 16, 32]
    errors = []
    for n in sizes:
        mesh = build_mesh_2d((0.0, 2.0 * math.pi), (0.0, 2.0 * math.pi), n, n)
        rho = Solution2D.project(lambda x, y: 2.0 * np.sin(x) * np.cos(y), mesh, r, "P")
        field = solve_poisson_2d(rho, "guiding", r)
        exact = Solution2D.project(lambda x, y: np.sin(x) * np.cos(y), mesh, r, "P")
        errors.append(field.phi.with_coeffs(field.phi.coeffs - exact.coeffs).l2_norm)
    assert observed_orders(errors, sizes)[-1] > r + 0.7
