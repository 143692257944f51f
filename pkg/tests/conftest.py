"""Shared fixtures: small periodic meshes, projected solutions and velocity fields."""

import math

import numpy as np
import pytest

from sldg.mesh import build_mesh_1d, build_mesh_2d
from sldg.solution import Solution1D, Solution2D
from sldg.trace import AnalyticField2D

TWO_PI = 2.0 * math.pi


@pytest.fixture
def mesh_1d():
    """16 cells on [0, 2π]."""
    return build_mesh_1d((0.0, TWO_PI), 16)


@pytest.fixture
def mesh_2d():
    """8 x 8 cells on [0, 2π]^2."""
    return build_mesh_2d((0.0, TWO_PI), (0.0, TWO_PI), 8, 8)


@pytest.fixture
def unit_mesh_2d():
    """4 x 4 cells on [0, 1]^2."""
    return build_mesh_2d((0.0, 1.0), (0.0, 1.0), 4, 4)


@pytest.fixture
def sine_1d(mesh_1d):
    return Solution1D.project(np.sin, mesh_1d, 2)


@pytest.fixture
def wave_q2(mesh_2d):
    """sin(x + y) in Q^2."""
    return Solution2D.project(lambda x, y: np.sin(x + y), mesh_2d, 2, "Q")


@pytest.fixture
def wave_p2(mesh_2d):
    """sin(x + y) in P^2."""
    return Solution2D.project(lambda x, y: np.sin(x + y), mesh_2d, 2, "P")


@pytest.fixture
def constant_field():
    """Uniform velocity (1, 1)."""
    return AnalyticField2D(lambda x, y, t: (np.ones_like(x), np.ones_like(y)), name="ones")


@pytest.fixture
def rotation_field():
    """Rigid rotation (-(y - π), x - π) about the centre of [0, 2π]^2."""
    return AnalyticField2D(lambda x, y, t: (-(y - math.pi), x - math.pi), name="rotation")
