"""Nonlinear drivers, limiter and invariant diagnostics."""

from .fluid import gc_nonsplit_step, gc_split_step, initial_fluid_state
from .invariants import InvariantRecord, InvariantSeries, compute_invariants
from .limiter import apply_positivity_limiter
from .state import FluidState, PhaseState, density
from .vlasov import initial_phase_state, vp_nonsplit_step, vp_strang_step

__all__ = [
    "FluidState",
    "InvariantRecord",
    "InvariantSeries",
    "PhaseState",
    "apply_positivity_limiter",
    "compute_invariants",
    "density",
    "gc_nonsplit_step",
    "gc_split_step",
    "initial_fluid_state",
    "initial_phase_state",
    "vp_nonsplit_step",
    "vp_strang_step",
]
