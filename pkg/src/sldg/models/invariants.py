"""Conserved-quantity diagnostics of the nonlinear models."""

from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..basis.quadrature import gauss_legendre
from ..solution import Solution2D
from .state import FluidState, PhaseState

ENTROPY_FLOOR = 1e-14
QUANTITIES = ("l1_norm", "l2_norm", "energy", "entropy_or_enstrophy")


class InvariantRecord(BaseModel):
    """Invariants at one time, optionally carrying the initial values they deviate from.

    Relative deviation is (q - q0) / |q0|, or q - q0 when q0 == 0.
    """

    model_config = ConfigDict(frozen=True)

    time: float
    l1_norm: float
    l2_norm: float
    energy: float
    entropy_or_enstrophy: float
    label: Literal["entropy", "enstrophy"]
    initial: Optional[Dict[str, float]] = None

    def values(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in QUANTITIES}

    def deviations(self) -> Dict[str, float]:
        current = self.values()
        base = self.initial or current
        out = {}
        for name, value in current.items():
            q0 = base[name]
            out[name] = (value - q0) / abs(q0) if q0 != 0.0 else value - q0
        return out

    def relative_to(self, first: "InvariantRecord") -> "InvariantRecord":
        return self.model_copy(update={"initial": first.values()})


class InvariantSeries:
    """Records of one run; every record deviates from the first."""

    def __init__(self):
        self.records: List[InvariantRecord] = []

    def append(self, record: InvariantRecord) -> InvariantRecord:
        if self.records:
            record = record.relative_to(self.records[0])
        self.records.append(record)
        return record

    def __len__(self) -> int:
        return len(self.records)

    @property
    def last(self) -> Optional[InvariantRecord]:
        return self.records[-1] if self.records else None


def quadrature_samples(u: Solution2D):
    """Point values, y-coordinates and weights on per-cell tensor Gauss rules (k + 3 points)."""
    rule = gauss_legendre(u.k + 3)
    xi, eta = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    w = np.outer(rule.weights, rule.weights).ravel() * 0.25 * u.mesh.cell_area
    phi = u.basis.values(xi.ravel(), eta.ravel())
    values = np.einsum("pm,ijm->ijp", phi, u.coeffs)
    y = u.mesh.mesh_y.faces[:-1, None] + 0.5 * u.mesh.dy * (eta.ravel()[None, :] + 1.0)
    return values, np.broadcast_to(y[None], values.shape), w


def compute_invariants(state: Union[PhaseState, FluidState]) -> InvariantRecord:
    """L1 and L2 norms, energy and entropy (phase space) or enstrophy (fluid).

    Phase space: energy = ∫∫ f v² + ∫ E², entropy = ∫∫ f log(max(f, 1e-14)).
    Fluid: energy = ∫ |u|², enstrophy = ∫ ω².
    """
    values, y, w = quadrature_samples(state.solution)
    l1 = float(np.sum(np.abs(values) * w))
    square = float(np.sum(values**2 * w))
    if isinstance(state, PhaseState):
        energy = float(np.sum(values * y**2 * w)) + state.efield.energy
        second = float(np.sum(values * np.log(np.maximum(values, ENTROPY_FLOOR)) * w))
        label = "entropy"
    else:
        energy = state.field.kinetic_energy
        second = square
        label = "enstrophy"
    return InvariantRecord(
        time=state.time,
        l1_norm=l1,
        l2_norm=float(np.sqrt(square)),
        energy=energy,
        entropy_or_enstrophy=second,
        label=label,
    )
