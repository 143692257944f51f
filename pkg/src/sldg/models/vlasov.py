"""1D1V Vlasov-Poisson drivers.

f_t + v f_x + E(x, t) f_v = 0 with E = -φ_x and -φ_xx = ∫ f dv - n̄₀ on a
periodic x interval; the truncated v interval is treated as periodic.
"""

from typing import Callable, Optional, Tuple

import numpy as np

from utils.logger import get_logger

from ..basis.modal import SPACE_P, SPACE_Q
from ..poisson import FieldSolution1D, solve_poisson_1d
from ..solution import Solution2D
from ..transport.split import sweep
from .limiter import bounds_hook
from .prediction import predictor_corrector_step
from .state import PhaseState, density

log = get_logger(__name__)


class VlasovVelocity:
    """Phase-space velocity (v, E(x)) of a field snapshot."""

    def __init__(self, efield: FieldSolution1D):
        self.efield = efield

    def velocity(self, x: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
        return v, self.efield.electric_field(x)


def vp_field(f: Solution2D, background: float, r: int) -> FieldSolution1D:
    """Electric field of ``f`` for the zero-mean source ∫ f dv - n̄₀."""
    rho = density(f)
    coeffs = rho.coeffs.copy()
    coeffs[:, 0] -= background
    return solve_poisson_1d(rho.with_coeffs(coeffs), r)


def initial_phase_state(f: Solution2D, r: Optional[int] = None) -> PhaseState:
    """State at t = 0 with n̄₀ taken as the initial mean density."""
    rho = density(f)
    background = float(np.mean(rho.coeffs[:, 0]))
    return PhaseState(solution=f, efield=vp_field(f, background, r or f.k), background=background)


def _hook(limiter: bool) -> Callable[[Solution2D], Solution2D]:
    return bounds_hook(0.0, None) if limiter else (lambda s: s)


def vp_strang_step(
    state: PhaseState,
    dt: float,
    r: Optional[int] = None,
    limiter: bool = False,
    substeps: Optional[int] = None,
    workers: int = 1,
) -> PhaseState:
    """Strang step: x over dt/2 at speed v, Poisson, v over dt at speed E^{n+1/2}(x), x over dt/2.

    The acceleration is frozen in time during the v-sweep.
    """
    f = state.solution
    if f.space != SPACE_Q:
        raise ValueError("Strang-split Vlasov-Poisson needs a Q^k phase-space solution")
    r = r or f.k
    hook = _hook(limiter)
    t, half = state.time, 0.5 * dt

    transport = lambda x, v, _t: np.broadcast_to(v, np.broadcast(x, v).shape)
    g = hook(sweep(f, "x", transport, t, half, substeps, workers=workers))
    e_half = vp_field(g, state.background, r)
    accel = lambda x, v, _t: e_half.electric_field(np.broadcast_to(x, np.broadcast(x, v).shape))
    g = hook(sweep(g, "y", accel, t, dt, substeps, workers=workers))
    g = hook(sweep(g, "x", transport, t + half, half, substeps, workers=workers))
    log.debug(f"Strang Vlasov-Poisson step t={t:.6g} -> {t + dt:.6g}")
    g = g.with_coeffs(g.coeffs, time=t + dt)
    return state.replace(solution=g, efield=vp_field(g, state.background, r))


def vp_nonsplit_step(
    state: PhaseState,
    dt: float,
    order: int = 2,
    mode: str = "quad",
    r: Optional[int] = None,
    limiter: bool = False,
    substeps: Optional[int] = None,
    workers: int = 1,
) -> PhaseState:
    """Non-splitting step over (x, v) with a predicted, time-reconstructed field (order 2 or 3)."""
    f = state.solution
    if f.space != SPACE_P:
        raise ValueError("Non-splitting Vlasov-Poisson needs a P^k phase-space solution")
    r = r or f.k
    solve = lambda g: VlasovVelocity(vp_field(g, state.background, r))
    g = predictor_corrector_step(
        f, VlasovVelocity(state.efield), solve, dt, order, mode, substeps, workers, _hook(limiter)
    )
    return state.replace(solution=g, efield=vp_field(g, state.background, r))
