"""Time-stepping loop of the benchmark harness."""

import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from utils.logger import get_logger

from ..basis.quadrature import gauss_lobatto
from ..errors import NumericalAbort, SLDGError
from ..mesh import Mesh2D, build_mesh_2d
from ..models.fluid import gc_nonsplit_step, gc_split_step, initial_fluid_state
from ..models.invariants import InvariantSeries, compute_invariants
from ..models.limiter import control_point_values
from ..models.state import FluidState, PhaseState
from ..models.vlasov import initial_phase_state, vp_nonsplit_step, vp_strang_step
from ..poisson import FieldSolution1D
from ..solution import Solution2D
from ..transport.nonsplit import step_2d
from ..transport.split import strang_step
from .cases import MODEL_LINEAR, MODEL_VLASOV
from .config import CaseConfig

log = get_logger(__name__)

# Remaining time below this fraction of T counts as having reached T.
END_TOL = 1e-12

State = Union[Solution2D, PhaseState, FluidState]


def compute_dt(cfl: float, mesh: Mesh2D, a_max: float, b_max: float) -> float:
    """Δt = CFL / (a_max/Δx + b_max/Δy).

    Raises:
        ValueError: If both speeds are zero or the CFL is not positive.
    """
    if cfl <= 0.0:
        raise ValueError(f"CFL must be positive, got {cfl}")
    rate = abs(a_max) / mesh.dx + abs(b_max) / mesh.dy
    if rate <= 0.0:
        raise ValueError("Time step is undefined when both maximum speeds are zero")
    return cfl / rate


def truncate_step(t: float, final_time: float, dt: float) -> float:
    """Step size that lands exactly on ``final_time`` when less than ``dt`` remains."""
    return min(dt, final_time - t)


def efield_max(efield: FieldSolution1D) -> float:
    """max |E| over per-cell Gauss-Lobatto points (r + 2)."""
    nodes = gauss_lobatto(efield.r + 2).nodes
    mesh = efield.efield.mesh
    x = mesh.faces[:-1, None] + 0.5 * mesh.dx * (nodes[None, :] + 1.0)
    return float(np.max(np.abs(efield.electric_field(x))))


@dataclass
class RunResult:
    """Outcome of one run; ``cpu_seconds`` covers the stepping loop only."""

    config: CaseConfig
    mesh: Mesh2D
    initial: Solution2D
    final: State
    invariants: Optional[InvariantSeries]
    steps: int
    last_dt: float
    cpu_seconds: float

    @property
    def solution(self) -> Solution2D:
        return self.final if isinstance(self.final, Solution2D) else self.final.solution

    @property
    def mass_deviation(self) -> float:
        m0 = self.initial.mass
        m = self.solution.mass
        return (m - m0) / abs(m0) if m0 != 0.0 else m - m0


def build_mesh(cfg: CaseConfig) -> Mesh2D:
    domain_x, domain_y = cfg.definition.domain(cfg.resolved_params)
    return build_mesh_2d(domain_x, domain_y, cfg.nx, cfg.ny)


def initial_solution(cfg: CaseConfig, mesh: Optional[Mesh2D] = None) -> Solution2D:
    """L2 projection of the case's initial data in the scheme's space."""
    mesh = mesh or build_mesh(cfg)
    u0 = cfg.definition.initial(cfg.resolved_params)
    return Solution2D.project(u0, mesh, cfg.k, cfg.space)


def _linear_stepper(cfg: CaseConfig, workers: int):
    definition = cfg.definition
    params = cfg.resolved_params
    field = definition.velocity(params, cfg.resolved_final_time)
    speeds = definition.max_speeds(params)

    if cfg.scheme == "split":
        a_field = lambda x, y, t: field.velocity(x, y, t)[0]
        b_field = lambda x, y, t: field.velocity(x, y, t)[1]

        def step(u: Solution2D, dt: float) -> Solution2D:
            return strang_step(u, a_field, b_field, u.time, dt, cfg.substeps, workers=workers)

    else:

        def step(u: Solution2D, dt: float) -> Solution2D:
            return step_2d(u, field, dt, cfg.mode, cfg.substeps, cfg.integrator, workers)

    return step, (lambda state: speeds)


def _vlasov_stepper(cfg: CaseConfig, workers: int):
    v_max = max(abs(v) for v in cfg.definition.domain(cfg.resolved_params)[1])

    if cfg.scheme == "split":

        def step(state: PhaseState, dt: float) -> PhaseState:
            return vp_strang_step(state, dt, cfg.r, cfg.limiter, cfg.substeps, workers)

    else:

        def step(state: PhaseState, dt: float) -> PhaseState:
            return vp_nonsplit_step(
                state, dt, cfg.temporal_order, cfg.mode, cfg.r, cfg.limiter, cfg.substeps, workers
            )

    return step, (lambda state: (v_max, efield_max(state.efield)))


def _fluid_stepper(cfg: CaseConfig, workers: int, bounds: Optional[Tuple[float, float]]):
    if cfg.scheme == "split":

        def step(state: FluidState, dt: float) -> FluidState:
            return gc_split_step(state, dt, cfg.r, bounds, cfg.substeps, workers)

    else:

        def step(state: FluidState, dt: float) -> FluidState:
            return gc_nonsplit_step(
                state, dt, cfg.temporal_order, cfg.mode, cfg.r, bounds, cfg.substeps, workers
            )

    return step, (lambda state: state.field.max_speed)


def prepare(cfg: CaseConfig, workers: int = 1) -> Tuple[State, Callable, Callable]:
    """Initial state, step function and max-speed function for a configuration."""
    u0 = initial_solution(cfg)
    model = cfg.definition.model
    if model == MODEL_LINEAR:
        step, speeds = _linear_stepper(cfg, workers)
        return u0, step, speeds
    if model == MODEL_VLASOV:
        step, speeds = _vlasov_stepper(cfg, workers)
        return initial_phase_state(u0, cfg.r), step, speeds
    bounds = None
    if cfg.limiter:
        values = control_point_values(u0)
        bounds = (float(values.min()), float(values.max()))
    step, speeds = _fluid_stepper(cfg, workers, bounds)
    return initial_fluid_state(u0, model, cfg.r), step, speeds


def run_case(cfg: CaseConfig, workers: int = 1) -> RunResult:
    """Run one configuration from t = 0 to its final time.

    Nonlinear runs re-measure the maximum speeds every step, so Δt adapts;
    invariants are recorded once per full step.

    Raises:
        NumericalAbort: If any step fails; carries the 1-based step index.
    """
    state, step, speeds = prepare(cfg, workers)
    initial = state if isinstance(state, Solution2D) else state.solution
    mesh = initial.mesh
    final_time = cfg.resolved_final_time
    series = None if isinstance(state, Solution2D) else InvariantSeries()
    if series is not None:
        series.append(compute_invariants(state))

    log.info(
        f"Running {cfg.case} with {cfg.label()} on {mesh.nx}x{mesh.ny}, CFL={cfg.cfl}, "
        f"T={final_time:.6g}"
    )
    t, steps, dt = 0.0, 0, 0.0
    started = time.perf_counter()
    while final_time - t > END_TOL * final_time:
        a_max, b_max = speeds(state)
        dt = truncate_step(t, final_time, compute_dt(cfg.cfl, mesh, a_max, b_max))
        steps += 1
        try:
            state = step(state, dt)
        except SLDGError as e:
            log.error(f"Step {steps} at t={t:.6g} failed: {e}")
            raise NumericalAbort(steps, e) from e
        t = state.time if isinstance(state, Solution2D) else state.solution.time
        if series is not None:
            series.append(compute_invariants(state))
        log.debug(f"Step {steps}: t={t:.6g}, dt={dt:.6g}")
    cpu_seconds = time.perf_counter() - started

    result = RunResult(
        config=cfg,
        mesh=mesh,
        initial=initial,
        final=state,
        invariants=series,
        steps=steps,
        last_dt=dt,
        cpu_seconds=cpu_seconds,
    )
    log.info(
        f"Finished {cfg.case} in {steps} steps, {cpu_seconds:.2f}s, "
        f"relative mass deviation {result.mass_deviation:.3e}"
    )
    return result
