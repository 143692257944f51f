"""Incompressible Euler (vorticity-stream function) and guiding-centre drivers.

Both transport a scalar s by the divergence-free velocity (-Φ_y, Φ_x):
ΔΦ = ω for Euler, -ΔΦ = ρ for the guiding-centre model.
"""

from typing import Callable, Optional, Tuple

import numpy as np

from utils.logger import get_logger

from ..basis.modal import SPACE_P, SPACE_Q
from ..poisson import FieldSolution2D, solve_poisson_2d
from ..solution import Solution2D
from ..transport.split import sweep
from .limiter import bounds_hook
from .prediction import predictor_corrector_step
from .state import FluidState

log = get_logger(__name__)

Bounds = Optional[Tuple[float, float]]


def fluid_field(s: Solution2D, kind: str, r: int) -> FieldSolution2D:
    """Field of a fluid state; Q^k states are projected onto P^r for the solve."""
    return solve_poisson_2d(s, kind, r, space=SPACE_P)


def initial_fluid_state(s: Solution2D, kind: str, r: Optional[int] = None) -> FluidState:
    return FluidState(solution=s, field=fluid_field(s, kind, r or s.k), kind=kind)


def _hook(bounds: Bounds) -> Callable[[Solution2D], Solution2D]:
    if bounds is None:
        return lambda s: s
    return bounds_hook(bounds[0], bounds[1])


def _frozen(component: Solution2D):
    """Split speed evaluated from one velocity component, constant in time."""
    return lambda x, y, _t: component.evaluate(*np.broadcast_arrays(x, y))


def gc_split_step(
    state: FluidState,
    dt: float,
    r: Optional[int] = None,
    bounds: Bounds = None,
    substeps: Optional[int] = None,
    workers: int = 1,
) -> FluidState:
    """Six-stage split step.

    1. velocity from the current state (Φ_y);
    2. x-sweep over dt/2 at speed -Φ_y;
    3. Poisson on the result (Φ_x);
    4. y-sweep over dt at speed Φ_x;
    5. Poisson on the result (Φ_y);
    6. x-sweep over dt/2 at speed -Φ_y.

    Each sweep uses the field of the most recent Poisson solve, frozen in time.
    """
    s = state.solution
    if s.space != SPACE_Q:
        raise ValueError("The split fluid driver needs a Q^k solution")
    r = r or s.k
    hook = _hook(bounds)
    t, half = state.time, 0.5 * dt

    g = hook(sweep(s, "x", _frozen(state.field.velocity_x), t, half, substeps, workers=workers))
    field = fluid_field(g, state.kind, r)
    g = hook(sweep(g, "y", _frozen(field.velocity_y), t, dt, substeps, workers=workers))
    field = fluid_field(g, state.kind, r)
    g = hook(sweep(g, "x", _frozen(field.velocity_x), t + half, half, substeps, workers=workers))
    log.debug(f"Split {state.kind} step t={t:.6g} -> {t + dt:.6g}")
    g = g.with_coeffs(g.coeffs, time=t + dt)
    return state.replace(solution=g, field=fluid_field(g, state.kind, r))


def gc_nonsplit_step(
    state: FluidState,
    dt: float,
    order: int = 2,
    mode: str = "quad",
    r: Optional[int] = None,
    bounds: Bounds = None,
    substeps: Optional[int] = None,
    workers: int = 1,
) -> FluidState:
    """Non-splitting step with a predicted, time-reconstructed velocity (order 2 or 3)."""
    s = state.solution
    if s.space != SPACE_P:
        raise ValueError("The non-splitting fluid driver needs a P^k solution")
    r = r or s.k
    solve = lambda g: fluid_field(g, state.kind, r)
    g = predictor_corrector_step(
        s, state.field, solve, dt, order, mode, substeps, workers, _hook(bounds)
    )
    return state.replace(solution=g, field=fluid_field(g, state.kind, r))
