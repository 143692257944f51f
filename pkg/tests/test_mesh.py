"""Tests for periodic meshes, wrapping and point location.

This file contains tests for:
- Mesh construction and validation
- Periodic wrapping
- Cell location with face snapping
"""

import math

import numpy as np
import pytest

from sldg.errors import MeshError
from sldg.mesh import build_mesh_1d, build_mesh_2d, locate_cell, wrap_periodic


# ============================================================================
# Construction Tests
# ============================================================================
# Uniform meshes and their rejected parameters


def test_build_mesh_1d_geometry():
    """Test cell size, faces and centres of a 1D mesh."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    assert mesh.dx == pytest.approx(0.25)
    np.testing.assert_allclose(mesh.faces, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(mesh.centers, [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("n", [0, -3])
def test_build_mesh_rejects_cell_count(n):
    """Test that a non-positive number of cells is rejected."""
    with pytest.raises(MeshError):
        build_mesh_1d((0.0, 1.0), n)


@pytest.mark.parametrize("domain", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf)])
def test_build_mesh_rejects_domain(domain):
    """Test that empty, inverted and infinite intervals are rejected."""
    with pytest.raises(MeshError):
        build_mesh_1d(domain, 4)


def test_mesh_error_is_value_error():
    """Test that mesh errors can be caught as ValueError."""
    with pytest.raises(ValueError):
        build_mesh_2d((0.0, 1.0), (0.0, 1.0), 4, 0)


def test_build_mesh_2d_properties():
    """Test the tensor-product mesh accessors."""
    mesh = build_mesh_2d((0.0, 2.0), (-1.0, 1.0), 4, 8)
    assert mesh.shape == (4, 8)
    assert mesh.dx == pytest.approx(0.5)
    assert mesh.dy == pytest.approx(0.25)
    assert mesh.cell_area == pytest.approx(0.125)
    assert mesh.area == pytest.approx(4.0)
    assert mesh.domain == ((0.0, 2.0), (-1.0, 1.0))


# ============================================================================
# Wrapping Tests
# ============================================================================
# Periodic images map into [x_lo, x_hi)


def test_wrap_periodic_right_end_maps_to_left():
    """Test that the right end of the interval wraps to the left end."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    assert wrap_periodic(1.0, mesh) == 0.0


def test_wrap_periodic_vectorised():
    """Test wrapping of points several periods away."""
    mesh = build_mesh_1d((-1.0, 1.0), 4)
    wrapped = wrap_periodic(np.array([-3.5, 1.5, 0.25, 5.0]), mesh)
    np.testing.assert_allclose(wrapped, [0.5, -0.5, 0.25, -1.0])


def test_wrap_tiny_negative_offset():
    """Test that a tiny negative offset stays inside the half-open interval."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    wrapped = wrap_periodic(-1e-18, mesh)
    assert 0.0 <= wrapped < 1.0


# ============================================================================
# Location Tests
# ============================================================================
# Index and reference coordinates of physical points


def test_locate_cell_interior_point():
    """Test location of a point inside a cell."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    loc = locate_cell(0.3, mesh)
    assert loc.index == (1,)
    assert loc.local[0] == pytest.approx(2.0 * (0.3 - 0.25) / 0.25 - 1.0)


def test_locate_cell_face_belongs_to_right_cell():
    """Test that a point on a face belongs to the cell on its right."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    loc = locate_cell(0.5, mesh)
    assert loc.index == (2,)
    assert loc.local[0] == pytest.approx(-1.0)


def test_locate_cell_snaps_near_face():
    """Test that points within the tolerance of a face snap onto it."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    loc = locate_cell(0.5 - 1e-16, mesh)
    assert loc.index == (2,)
    assert loc.local[0] == -1.0


def test_locate_cell_wraps():
    """Test that points outside the domain are located in their periodic image."""
    mesh = build_mesh_1d((0.0, 1.0), 4)
    assert locate_cell(1.1, mesh).index == (0,)
    assert locate_cell(-0.1, mesh).index == (3,)


def test_locate_cell_2d():
    """Test 2D location of a point."""
    mesh = build_mesh_2d((0.0, 1.0), (0.0, 2.0), 4, 4)
    loc = locate_cell(0.6, mesh, y=1.9)
    assert loc.index == (2, 3)
    assert loc.local[0] == pytest.approx(-0.2)
    assert loc.local[1] == pytest.approx(0.6)


def test_locate_cell_2d_needs_y():
    """Test that 2D location requires both coordinates."""
    mesh = build_mesh_2d((0.0, 1.0), (0.0, 1.0), 2, 2)
    with pytest.raises(ValueError):
        locate_cell(0.5, mesh)


def test_vectorised_locate_reconstructs_points():
    """Test that to_physical inverts locate."""
    mesh = build_mesh_1d((-2.0, 3.0), 7)
    x = np.linspace(-2.0, 2.99, 50)
    index, local = mesh.locate(x)
    np.testing.assert_allclose(mesh.to_physical(index, local), x, atol=1e-12)
    assert np.all((local >= -1.0) & (local < 1.0))
