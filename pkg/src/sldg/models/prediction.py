"""Prediction-correction for non-splitting steps of self-consistent models.

The velocity of a nonlinear model depends on the unknown solution, so the
upstream cells of the corrector are traced in a field reconstructed in time
from predicted snapshots:

* order 2: predict u^{n+1} with Euler-traced feet in the frozen field F^n, solve
  the field equation for F̃^{n+1}, correct with the linear-in-time field;
* order 3: additionally predict u^{n+1/2} with the order-2 scheme over dt/2 and
  correct with the quadratic-in-time field through (F^n, F̃^{n+1/2}, F̃^{n+1}).
"""

from typing import Callable, Optional

import numpy as np

from utils.logger import get_logger

from ..errors import PredictionError, SLDGError
from ..solution import Solution2D
from ..trace import SnapshotField2D, VelocitySnapshot
from ..transport.nonsplit import step_2d

log = get_logger(__name__)

ORDERS = (2, 3)

FieldSolver = Callable[[Solution2D], VelocitySnapshot]
Hook = Callable[[Solution2D], Solution2D]


def _check_prediction(u: Solution2D, stage: str) -> Solution2D:
    if not np.all(np.isfinite(u.coeffs)):
        raise PredictionError(f"{stage} prediction at t={u.time:.6g} is not finite")
    return u


def _order2(
    u: Solution2D,
    field_n: VelocitySnapshot,
    solve_field: FieldSolver,
    dt: float,
    mode: str,
    substeps: Optional[int],
    workers: int,
    hook: Hook,
) -> Solution2D:
    t = u.time
    try:
        predicted = step_2d(
            u, SnapshotField2D([(t, field_n)]), dt, mode, substeps, "euler", workers
        )
    except SLDGError as e:
        raise PredictionError(f"Predictor failed over [{t:.6g}, {t + dt:.6g}]: {e}") from e
    predicted = hook(_check_prediction(predicted, "Order-2"))
    field_next = solve_field(predicted)
    return hook(
        step_2d(
            u, SnapshotField2D([(t, field_n), (t + dt, field_next)]), dt, mode, substeps,
            "rk4", workers,
        )
    )


def predictor_corrector_step(
    u: Solution2D,
    field_n: VelocitySnapshot,
    solve_field: FieldSolver,
    dt: float,
    order: int = 2,
    mode: str = "quad",
    substeps: Optional[int] = None,
    workers: int = 1,
    hook: Optional[Hook] = None,
) -> Solution2D:
    """One non-splitting step with a temporally reconstructed self-consistent field.

    Args:
        u: P^k solution at ``u.time``.
        field_n: Field snapshot at ``u.time``.
        solve_field: Maps a predicted solution to its field snapshot.
        dt: Step size.
        order: Temporal order of the reconstruction, 2 or 3.
        mode: Upstream-cell approximation, ``quad`` or ``qc``.
        substeps: Tracing substeps (default from the CFL).
        workers: Thread count.
        hook: Optional map applied to predictions and the result (e.g. a limiter).

    Raises:
        PredictionError: If a prediction fails or is not finite.
    """
    if order not in ORDERS:
        raise ValueError(f"Prediction-correction order must be one of {ORDERS}, got {order}")
    hook = hook or (lambda s: s)
    if order == 2:
        return _order2(u, field_n, solve_field, dt, mode, substeps, workers, hook)

    t = u.time
    half = _check_prediction(
        _order2(u, field_n, solve_field, 0.5 * dt, mode, substeps, workers, hook), "Half-step"
    )
    full = _check_prediction(
        _order2(u, field_n, solve_field, dt, mode, substeps, workers, hook), "Full-step"
    )
    field = SnapshotField2D(
        [(t, field_n), (t + 0.5 * dt, solve_field(half)), (t + dt, solve_field(full))]
    )
    log.debug(f"Order-3 correction over [{t:.6g}, {t + dt:.6g}]")
    return hook(step_2d(u, field, dt, mode, substeps, "rk4", workers))
