"""Exceptions raised by the solver library and the benchmark harness."""

from typing import Optional, Tuple


class SLDGError(Exception):
    """Base class for all solver errors."""


class MeshError(SLDGError, ValueError):
    """Invalid mesh construction parameters."""


class ConfigError(SLDGError, ValueError):
    """Invalid or inconsistent case configuration."""


class CharacteristicCrossingError(SLDGError):
    """Traced characteristics crossed within one time step."""

    def __init__(self, message: str, cell: Optional[Tuple[int, ...]] = None):
        super().__init__(message if cell is None else f"{message} (cell {cell})")
        self.cell = cell


class ConditioningError(SLDGError):
    """An interpolation or least-squares system is too ill-conditioned to solve."""


class GeometryError(SLDGError):
    """Upstream-cell clipping could not be resolved."""

    def __init__(self, message: str, cell: Optional[Tuple[int, ...]] = None):
        super().__init__(message if cell is None else f"{message} (cell {cell})")
        self.cell = cell


class TraceError(SLDGError):
    """A velocity field was queried outside the time span it can represent."""


class PoissonCompatibilityError(SLDGError):
    """The Poisson source does not have zero mean over the periodic domain."""


class SolverError(SLDGError):
    """A linear solve failed or missed its residual tolerance."""


class LimiterError(SLDGError):
    """A cell average violates the bounds the limiter is asked to enforce."""


class PredictionError(SLDGError):
    """The predicted state of a prediction-correction step is unusable."""


class NumericalAbort(SLDGError):
    """A time step failed; carries the failing step index."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step} failed: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause
