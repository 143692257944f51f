"""Backward characteristic tracing for analytic and DG-reconstructed velocity fields.

Feet are returned unwrapped: a trajectory that leaves the periodic domain keeps
its physical coordinate, and wrapping happens only when a cell is located.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .errors import TraceError

INTEGRATORS = ("rk4", "euler")
TEMPORAL_RULES = {"constant": 1, "linear": 2, "quadratic": 3}

Field1D = Callable[[np.ndarray, float], np.ndarray]


class VelocitySnapshot(Protocol):
    """Anything that can report a frozen velocity at physical points."""

    def velocity(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]: ...


class VelocityField2D(ABC):
    """Velocity field ``(a, b)(x, y, t)`` used to trace 2D characteristics."""

    kind: str = "analytic"

    @abstractmethod
    def velocity(self, x: np.ndarray, y: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Velocity components at points ``(x, y)`` and time ``t``."""
        ...


class AnalyticField2D(VelocityField2D):
    """Prescribed velocity given by a vectorised function ``func(x, y, t) -> (a, b)``.

    Evaluated at unwrapped coordinates.
    """

    kind = "analytic"

    def __init__(self, func: Callable[..., Tuple[np.ndarray, np.ndarray]], name: str = "analytic"):
        self.func = func
        self.name = name

    def velocity(self, x, y, t):
        a, b = self.func(x, y, t)
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.broadcast_to(a, shape), np.broadcast_to(b, shape)


class SnapshotField2D(VelocityField2D):
    """Velocity reconstructed in time from DG field snapshots.

    One snapshot is a frozen field valid at every time; two and three snapshots
    are interpolated linearly and quadratically (Lagrange in t) and may only be
    queried inside their time span.
    """

    kind = "dg-snapshot-sequence"

    def __init__(
        self,
        snapshots: Sequence[Tuple[float, VelocitySnapshot]],
        rule: Optional[str] = None,
    ):
        if len(snapshots) < 1:
            raise ValueError("A snapshot field needs at least one snapshot")
        ordered = sorted(snapshots, key=lambda item: item[0])
        if rule is None:
            rule = {1: "constant", 2: "linear", 3: "quadratic"}.get(len(ordered))
        if rule not in TEMPORAL_RULES:
            raise ValueError(f"Unknown temporal rule {rule!r}; use one of {list(TEMPORAL_RULES)}")
        if len(ordered) != TEMPORAL_RULES[rule]:
            raise ValueError(
                f"{rule} reconstruction needs {TEMPORAL_RULES[rule]} snapshots, got {len(ordered)}"
            )
        self.times = np.array([t for t, _ in ordered], dtype=float)
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0.0):
            raise ValueError(f"Snapshot times must be distinct, got {self.times}")
        self.fields: List[VelocitySnapshot] = [f for _, f in ordered]
        self.rule = rule
        scale = max(1.0, float(np.max(np.abs(self.times))))
        self._tol = 1e-12 * scale

    @property
    def time_span(self) -> Tuple[float, float]:
        if len(self.times) == 1:
            return (-math.inf, math.inf)
        return float(self.times[0]), float(self.times[-1])

    def weights(self, t: float) -> np.ndarray:
        """Lagrange weights of the snapshots at time ``t``."""
        lo, hi = self.time_span
        if t < lo - self._tol or t > hi + self._tol:
            raise TraceError(f"Field queried at t={t} outside its snapshot span [{lo}, {hi}]")
        n = len(self.times)
        w = np.ones(n)
        for i in range(n):
            for j in range(n):
                if i != j:
                    w[i] *= (t - self.times[j]) / (self.times[i] - self.times[j])
        return w

    def velocity(self, x, y, t):
        w = self.weights(t)
        a_total = 0.0
        b_total = 0.0
        for wi, field in zip(w, self.fields):
            if wi == 0.0:
                continue
            a, b = field.velocity(x, y)
            a_total = a_total + wi * a
            b_total = b_total + wi * b
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.broadcast_to(a_total, shape), np.broadcast_to(b_total, shape)


@dataclass(frozen=True)
class TracedPoint:
    """End point at the later time level and its unwrapped foot at the earlier one."""

    end: Tuple[float, ...]
    foot: Tuple[float, ...]


def default_substeps(cfl: float) -> int:
    """Substep count used when none is given: ``max(1, ceil(CFL))``."""
    return max(1, int(math.ceil(cfl - 1e-12)))


def _check_span(t_end: float, t_start: float, substeps: int, integrator: str) -> None:
    if t_start > t_end:
        raise ValueError(f"Backward tracing needs t_start <= t_end, got {t_start} > {t_end}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    if integrator not in INTEGRATORS:
        raise ValueError(f"Unknown integrator {integrator!r}; use one of {INTEGRATORS}")


def _integrate_backward(rhs, state, t_end, t_start, substeps, integrator):
    """March ``state`` from ``t_end`` back to ``t_start`` with ``rhs(state, t)``."""
    h = (t_start - t_end) / substeps
    t = t_end
    for _ in range(substeps):
        if integrator == "euler":
            k1 = rhs(state, t)
            state = tuple(s + h * d for s, d in zip(state, k1))
        else:
            k1 = rhs(state, t)
            k2 = rhs(tuple(s + 0.5 * h * d for s, d in zip(state, k1)), t + 0.5 * h)
            k3 = rhs(tuple(s + 0.5 * h * d for s, d in zip(state, k2)), t + 0.5 * h)
            k4 = rhs(tuple(s + h * d for s, d in zip(state, k3)), t + h)
            state = tuple(
                s + h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
                for s, d1, d2, d3, d4 in zip(state, k1, k2, k3, k4)
            )
        t = t + h
    return state


def trace_feet_1d(
    field: Field1D,
    x_end: np.ndarray,
    t_end: float,
    t_start: float,
    substeps: int = 1,
    integrator: str = "rk4",
) -> np.ndarray:
    """Vectorised backward trace of ``dx/dt = a(x, t)`` from ``t_end`` to ``t_start``."""
    _check_span(t_end, t_start, substeps, integrator)
    x_end = np.asarray(x_end, dtype=float)
    if t_start == t_end:
        return x_end.copy()
    (foot,) = _integrate_backward(
        lambda s, t: (np.broadcast_to(field(s[0], t), s[0].shape),),
        (x_end,),
        t_end,
        t_start,
        substeps,
        integrator,
    )
    return foot


def trace_feet_2d(
    field: VelocityField2D,
    x_end: np.ndarray,
    y_end: np.ndarray,
    t_end: float,
    t_start: float,
    substeps: int = 1,
    integrator: str = "rk4",
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised backward trace of ``(dx/dt, dy/dt) = (a, b)(x, y, t)``."""
    _check_span(t_end, t_start, substeps, integrator)
    x_end, y_end = np.broadcast_arrays(
        np.asarray(x_end, dtype=float), np.asarray(y_end, dtype=float)
    )
    if t_start == t_end:
        return x_end.copy(), y_end.copy()
    return _integrate_backward(
        lambda s, t: field.velocity(s[0], s[1], t),
        (x_end, y_end),
        t_end,
        t_start,
        substeps,
        integrator,
    )


def trace_back_1d(
    field: Field1D,
    x_end: float,
    t_end: float,
    t_start: float,
    substeps: int = 1,
    integrator: str = "rk4",
) -> TracedPoint:
    """Foot at ``t_start`` of the characteristic through ``x_end`` at ``t_end``."""
    foot = trace_feet_1d(field, np.array([x_end]), t_end, t_start, substeps, integrator)
    return TracedPoint(end=(float(x_end),), foot=(float(foot[0]),))


def trace_back_2d(
    field: VelocityField2D,
    end: Tuple[float, float],
    t_end: float,
    t_start: float,
    substeps: int = 1,
    integrator: str = "rk4",
) -> TracedPoint:
    """Foot at ``t_start`` of the characteristic through ``end`` at ``t_end``.

    Raises:
        TraceError: If a snapshot field is queried outside its time span.
    """
    xs, ys = trace_feet_2d(
        field, np.array([end[0]]), np.array([end[1]]), t_end, t_start, substeps, integrator
    )
    return TracedPoint(end=(float(end[0]), float(end[1])), foot=(float(xs[0]), float(ys[0])))
