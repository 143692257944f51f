"""Bound-preserving scaling limiter.

Deviations from the cell average are scaled by θ so that every control
point lies in [lower, upper]; cell averages are untouched, which keeps the
mass exact.
"""

from functools import lru_cache
from typing import Optional

import numpy as np

from utils.logger import get_logger

from ..basis.modal import get_basis
from ..basis.quadrature import gauss_lobatto
from ..errors import LimiterError
from ..solution import Solution2D

log = get_logger(__name__)

AVERAGE_TOL = 1e-12


@lru_cache(maxsize=None)
def _control_values(k: int, space: str) -> np.ndarray:
    """Basis values at the tensor Gauss-Lobatto points with k + 2 nodes per direction."""
    nodes = gauss_lobatto(k + 2).nodes
    xi, eta = np.meshgrid(nodes, nodes, indexing="ij")
    return get_basis(k, space).values(xi.ravel(), eta.ravel())


def control_point_values(u: Solution2D) -> np.ndarray:
    """Point values at the limiter control points, ``(nx, ny, (k + 2)^2)``."""
    return np.einsum("pm,ijm->ijp", _control_values(u.k, u.space), u.coeffs)


def _ratio(bound: float, avg: np.ndarray, extreme: np.ndarray, violated: np.ndarray) -> np.ndarray:
    out = np.ones_like(avg)
    gap = extreme - avg
    safe = violated & (gap != 0.0)
    out[safe] = np.abs((bound - avg[safe]) / gap[safe])
    return out


def apply_positivity_limiter(
    u: Solution2D, lower: Optional[float] = 0.0, upper: Optional[float] = None
) -> Solution2D:
    """Scale every cell about its average so control-point values respect the bounds.

    With ū the cell average and m, M the control-point extremes,
    θ = min(1, |(lower - ū)/(m - ū)|, |(upper - ū)/(M - ū)|).

    Args:
        u: 2D solution (P^k or Q^k).
        lower: Lower bound, or None to skip it.
        upper: Upper bound, or None to skip it.

    Raises:
        LimiterError: If a cell average itself violates a bound.
    """
    if u.k == 0 or (lower is None and upper is None):
        return u
    avg = u.coeffs[..., 0]
    values = control_point_values(u)
    theta = np.ones_like(avg)

    if lower is not None:
        if np.any(avg < lower - AVERAGE_TOL):
            cell = np.unravel_index(int(np.argmin(avg)), avg.shape)
            raise LimiterError(
                f"Cell average {avg[cell]:.3e} in cell {cell} is below the lower bound {lower}"
            )
        m = values.min(axis=-1)
        theta = np.minimum(theta, _ratio(lower, avg, m, m < lower))
    if upper is not None:
        if np.any(avg > upper + AVERAGE_TOL):
            cell = np.unravel_index(int(np.argmax(avg)), avg.shape)
            raise LimiterError(
                f"Cell average {avg[cell]:.3e} in cell {cell} is above the upper bound {upper}"
            )
        big = values.max(axis=-1)
        theta = np.minimum(theta, _ratio(upper, avg, big, big > upper))

    theta = np.clip(theta, 0.0, 1.0)
    limited = int(np.count_nonzero(theta < 1.0))
    if limited == 0:
        return u
    log.debug(f"Limiter scaled {limited} of {theta.size} cells (min theta {theta.min():.3e})")
    coeffs = u.coeffs.copy()
    coeffs[..., 1:] *= theta[..., None]
    return u.with_coeffs(coeffs)


def bounds_hook(lower: Optional[float], upper: Optional[float]):
    """Limiter as a ``Solution2D -> Solution2D`` hook for the sweep drivers."""
    return lambda s: apply_positivity_limiter(s, lower=lower, upper=upper)
