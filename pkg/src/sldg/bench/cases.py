"""Registry of benchmark cases: domains, initial data, velocity fields and exact solutions."""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..trace import AnalyticField2D

MODEL_LINEAR = "linear"
MODEL_VLASOV = "vlasov"
MODEL_EULER = "euler"
MODEL_GUIDING = "guiding"

Domain = Tuple[float, float]
Params = Dict[str, float]
Initial = Callable[[np.ndarray, np.ndarray], np.ndarray]
Exact = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class CaseDefinition:
    """One benchmark problem.

    ``initial(params)`` returns u0(x, y); ``exact(params, T)`` returns u(x, y, t)
    when a closed form exists; ``velocity(params, T)`` is the analytic field of
    linear cases; ``max_speeds(params)`` bounds |a| and |b| for the time step.
    """

    case_id: str
    model: str
    domain: Callable[[Params], Tuple[Domain, Domain]]
    final_time: float
    defaults: Params
    initial: Callable[[Params], Initial]
    exact: Optional[Callable[[Params, float], Exact]] = None
    velocity: Optional[Callable[[Params, float], AnalyticField2D]] = None
    max_speeds: Optional[Callable[[Params], Tuple[float, float]]] = None
    cut: Tuple[str, float] = ("x", math.pi)

    @property
    def nonlinear(self) -> bool:
        return self.model != MODEL_LINEAR


# ----------------------------------------------------------------------
# linear-const: u_t + u_x + u_y = 0
# ----------------------------------------------------------------------


def _linear_exact(params: Params, final_time: float) -> Exact:
    return lambda x, y, t: np.sin(x + y - 2.0 * t)


LINEAR_CONST = CaseDefinition(
    case_id="linear-const",
    model=MODEL_LINEAR,
    domain=lambda p: ((-math.pi, math.pi), (-math.pi, math.pi)),
    final_time=math.pi,
    defaults={},
    initial=lambda p: (lambda x, y: np.sin(x + y)),
    exact=_linear_exact,
    velocity=lambda p, T: AnalyticField2D(
        lambda x, y, t: (np.ones_like(x), np.ones_like(y)), name="constant (1, 1)"
    ),
    max_speeds=lambda p: (1.0, 1.0),
)


# ----------------------------------------------------------------------
# rigid-body: u_t - (y u)_x + (x u)_y = 0
# ----------------------------------------------------------------------


def _gaussian(params: Params) -> Initial:
    s = params["gaussian_y_scale"]
    return lambda x, y: np.exp(-(x**2) - s * y**2)


def _rigid_exact(params: Params, final_time: float) -> Exact:
    u0 = _gaussian(params)

    def exact(x, y, t):
        c, s = math.cos(t), math.sin(t)
        return u0(c * x + s * y, -s * x + c * y)

    return exact


RIGID_BODY = CaseDefinition(
    case_id="rigid-body",
    model=MODEL_LINEAR,
    domain=lambda p: ((-2.0 * math.pi, 2.0 * math.pi), (-2.0 * math.pi, 2.0 * math.pi)),
    final_time=20.0 * math.pi,
    defaults={"gaussian_y_scale": 1.0},
    initial=_gaussian,
    exact=_rigid_exact,
    velocity=lambda p, T: AnalyticField2D(lambda x, y, t: (-y, x), name="rigid rotation"),
    max_speeds=lambda p: (2.0 * math.pi, 2.0 * math.pi),
)


# ----------------------------------------------------------------------
# swirling: deformation that reverses at T
# ----------------------------------------------------------------------


def cosine_bell(params: Params) -> Initial:
    r0 = params["bell_radius"]
    xc, yc = params["bell_center_x"], params["bell_center_y"]

    def bell(x, y):
        r = np.hypot(x - xc, y - yc)
        return np.where(r < r0, r0 * np.cos(r * math.pi / (2.0 * r0)) ** 6, 0.0)

    return bell


def _swirling_field(params: Params, final_time: float) -> AnalyticField2D:
    def velocity(x, y, t):
        g = math.pi * math.cos(math.pi * t / final_time)
        return (
            -(np.cos(0.5 * x) ** 2) * np.sin(y) * g,
            np.sin(x) * np.cos(0.5 * y) ** 2 * g,
        )

    return AnalyticField2D(velocity, name="swirling deformation")


def _swirling_exact(params: Params, final_time: float) -> Exact:
    bell = cosine_bell(params)

    def exact(x, y, t):
        if not math.isclose(t, final_time, rel_tol=1e-12) and t != 0.0:
            raise ValueError("The swirling flow has a closed form only at t = 0 and t = T")
        return bell(x, y)

    return exact


SWIRLING = CaseDefinition(
    case_id="swirling",
    model=MODEL_LINEAR,
    domain=lambda p: ((-math.pi, math.pi), (-math.pi, math.pi)),
    final_time=1.5,
    defaults={"bell_radius": 0.3 * math.pi, "bell_center_x": 0.3 * math.pi, "bell_center_y": 0.0},
    initial=cosine_bell,
    exact=_swirling_exact,
    velocity=_swirling_field,
    max_speeds=lambda p: (math.pi, math.pi),
)


# ----------------------------------------------------------------------
# landau: 1D1V Vlasov-Poisson
# ----------------------------------------------------------------------


def _landau(params: Params) -> Initial:
    alpha, k0 = params["alpha"], params["k0"]
    return lambda x, v: (
        (1.0 + alpha * np.cos(k0 * x)) * np.exp(-0.5 * v**2) / math.sqrt(2.0 * math.pi)
    )


LANDAU = CaseDefinition(
    case_id="landau",
    model=MODEL_VLASOV,
    domain=lambda p: ((0.0, 2.0 * math.pi / p["k0"]), (-p["v_max"], p["v_max"])),
    final_time=40.0,
    defaults={"alpha": 0.5, "k0": 0.5, "v_max": 2.0 * math.pi},
    initial=_landau,
    cut=("y", 0.0),
)


# ----------------------------------------------------------------------
# incompressible Euler and guiding centre
# ----------------------------------------------------------------------


def _stationary(params: Params) -> Initial:
    return lambda x, y: -2.0 * np.sin(x) * np.sin(y)


EULER_STATIONARY = CaseDefinition(
    case_id="euler-stationary",
    model=MODEL_EULER,
    domain=lambda p: ((0.0, 2.0 * math.pi), (0.0, 2.0 * math.pi)),
    final_time=1.0,
    defaults={},
    initial=_stationary,
    exact=lambda p, T: (lambda x, y, t: -2.0 * np.sin(x) * np.sin(y)),
)


def _shear_layer(params: Params) -> Initial:
    delta, width = params["delta"], params["shear_width"]

    def omega(x, y):
        lower = delta * np.cos(x) - np.cosh((y - 0.5 * math.pi) / width) ** -2 / width
        upper = delta * np.cos(x) + np.cosh((1.5 * math.pi - y) / width) ** -2 / width
        return np.where(y <= math.pi, lower, upper)

    return omega


SHEAR_LAYER = CaseDefinition(
    case_id="shear-layer",
    model=MODEL_EULER,
    domain=lambda p: ((0.0, 2.0 * math.pi), (0.0, 2.0 * math.pi)),
    final_time=8.0,
    defaults={"delta": 0.05, "shear_width": math.pi / 15.0},
    initial=_shear_layer,
    cut=("x", math.pi),
)


def _kelvin_helmholtz(params: Params) -> Initial:
    eps, k0 = params["perturbation"], params["k0"]
    return lambda x, y: np.sin(y) + eps * np.cos(k0 * x)


KELVIN_HELMHOLTZ = CaseDefinition(
    case_id="kelvin-helmholtz",
    model=MODEL_GUIDING,
    domain=lambda p: ((0.0, 4.0 * math.pi), (0.0, 2.0 * math.pi)),
    final_time=40.0,
    defaults={"perturbation": 0.015, "k0": 0.5},
    initial=_kelvin_helmholtz,
    cut=("y", math.pi),
)


CASES: Dict[str, CaseDefinition] = {
    c.case_id: c
    for c in (
        LINEAR_CONST,
        RIGID_BODY,
        SWIRLING,
        LANDAU,
        SHEAR_LAYER,
        KELVIN_HELMHOLTZ,
        EULER_STATIONARY,
    )
}


def get_case(case_id: str) -> CaseDefinition:
    """Look up a case by id.

    Raises:
        KeyError: For an unknown id; the message lists the known ones.
    """
    try:
        return CASES[case_id]
    except KeyError:
        raise KeyError(f"Unknown case {case_id!r}; known cases: {sorted(CASES)}") from None
