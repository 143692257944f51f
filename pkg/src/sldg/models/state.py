"""Immutable states of the nonlinear models."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..mesh import Mesh1D
from ..poisson import SIGN_EULER, SIGN_GUIDING, FieldSolution1D, FieldSolution2D
from ..solution import Solution1D, Solution2D

FLUID_KINDS = (SIGN_EULER, SIGN_GUIDING)


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Distribution f(x, v) with its electric field.

    ``solution`` lives on the (x, v) mesh; ``background`` is the initial mean
    density n̄₀ so the Poisson source ∫ f dv - n̄₀ stays zero-mean.
    """

    solution: Solution2D
    efield: FieldSolution1D
    background: float

    @property
    def time(self) -> float:
        return self.solution.time

    def replace(self, **changes) -> "PhaseState":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class FluidState:
    """Vorticity (``kind="euler"``) or guiding-centre density (``kind="guiding"``) with its field."""

    solution: Solution2D
    field: FieldSolution2D
    kind: str

    def __post_init__(self):
        if self.kind not in FLUID_KINDS:
            raise ValueError(f"kind must be one of {FLUID_KINDS}, got {self.kind!r}")

    @property
    def time(self) -> float:
        return self.solution.time

    def replace(self, **changes) -> "FluidState":
        return replace(self, **changes)


def density(f: Solution2D, mesh_x: Optional[Mesh1D] = None) -> Solution1D:
    """ρ(x) = ∫ f dv as a degree-k DG function on the x mesh.

    Only the v-constant modes contribute: ∫ P_a(ξ) P_b(η) dv = dv · P_a(ξ) · 2δ_b0 / 2.
    """
    mesh_x = mesh_x or f.mesh.mesh_x
    basis = f.basis
    coeffs = np.zeros((f.mesh.nx, f.k + 1))
    for m, (a, b) in enumerate(basis.modes):
        if b == 0:
            coeffs[:, a] = f.mesh.dy * np.sum(f.coeffs[:, :, m], axis=1)
    return Solution1D(mesh=mesh_x, k=f.k, coeffs=coeffs, time=f.time)
