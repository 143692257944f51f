"""Validated run configuration of the benchmark harness."""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.config import apply_overrides, read_config

from ..basis.modal import SPACE_P, SPACE_Q
from ..errors import ConfigError
from ..trace import INTEGRATORS
from .cases import CASES, CaseDefinition, get_case


class CaseConfig(BaseModel):
    """One run of one case.

    ``poisson_degree`` defaults to k and ``order`` (temporal order of the
    prediction-correction of non-splitting nonlinear runs) to k + 1, capped at 3.
    """

    model_config = ConfigDict(extra="forbid")

    case: str
    scheme: Literal["split", "nonsplit"]
    k: int = Field(ge=1, le=3)
    qc: bool = False
    poisson_degree: Optional[int] = Field(default=None, ge=1)
    nx: int = Field(gt=0)
    ny: int = Field(gt=0)
    cfl: float = Field(gt=0.0)
    final_time: Optional[float] = Field(default=None, gt=0.0)
    limiter: bool = False
    order: Optional[Literal[2, 3]] = None
    substeps: Optional[int] = Field(default=None, ge=1)
    integrator: str = "rk4"
    params: Dict[str, float] = Field(default_factory=dict)
    output_dir: str = "outputs"
    reference: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "CaseConfig":
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; known cases: {sorted(CASES)}")
        definition = CASES[self.case]
        if self.qc and self.scheme != "nonsplit":
            raise ValueError("qc is only available with the nonsplit scheme")
        if self.limiter and not definition.nonlinear:
            raise ValueError("the limiter is only used for nonlinear cases")
        if self.scheme == "nonsplit" and self.k > 2:
            raise ValueError("the nonsplit scheme supports k = 1 or 2")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")
        unknown = set(self.params) - set(definition.defaults)
        if unknown:
            raise ValueError(f"unknown parameters for {self.case}: {sorted(unknown)}")
        for name, value in self.params.items():
            if not math.isfinite(value):
                raise ValueError(f"parameter {name} must be finite, got {value}")
        return self

    @property
    def definition(self) -> CaseDefinition:
        return get_case(self.case)

    @property
    def resolved_params(self) -> Dict[str, float]:
        return {**self.definition.defaults, **self.params}

    @property
    def resolved_final_time(self) -> float:
        return self.final_time if self.final_time is not None else self.definition.final_time

    @property
    def space(self) -> str:
        return SPACE_Q if self.scheme == "split" else SPACE_P

    @property
    def mode(self) -> str:
        return "qc" if self.qc else "quad"

    @property
    def r(self) -> int:
        return self.poisson_degree or self.k

    @property
    def temporal_order(self) -> int:
        return self.order or min(self.k + 1, 3)

    def label(self) -> str:
        """Short scheme label such as ``P2-QC`` or ``Q1-split``."""
        if self.scheme == "split":
            return f"Q{self.k}-split"
        return f"P{self.k}-QC" if self.qc else f"P{self.k}"


class SweepConfig(BaseModel):
    """Refinement (``meshes``) or CFL (``cfls``) sequence, plus optional reference overrides."""

    model_config = ConfigDict(extra="forbid")

    meshes: Optional[List[int]] = None
    cfls: Optional[List[float]] = None
    reference: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "SweepConfig":
        if (self.meshes is None) == (self.cfls is None):
            raise ValueError("a sweep needs exactly one of 'meshes' or 'cfls'")
        values = self.meshes if self.meshes is not None else self.cfls
        if len(values) < 2:
            raise ValueError("a sweep needs at least two entries")
        if any(v <= 0 for v in values) or list(values) != sorted(values):
            raise ValueError("sweep entries must be positive and increasing")
        return self

    @property
    def kind(self) -> str:
        return "spatial" if self.meshes is not None else "temporal"


def load_case_config(
    path: str, overrides: Optional[List[str]] = None
) -> Tuple[CaseConfig, Optional[SweepConfig]]:
    """Read a case file, apply ``key=value`` overrides and validate.

    ``mesh=N`` is accepted as a shorthand for ``nx=N`` and ``ny=N``.

    Raises:
        ConfigError: If the file cannot be read or an override is malformed.
        pydantic.ValidationError: If the resulting configuration is invalid.
    """
    try:
        raw = apply_overrides(read_config(path), overrides)
    except (OSError, ValueError, yaml.YAMLError) as e:
        raise ConfigError(str(e)) from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Case file {path} must contain a mapping")
    sweep = raw.pop("sweep", None)
    mesh = raw.pop("mesh", None)
    if mesh is not None:
        raw["nx"] = raw["ny"] = mesh
    config = CaseConfig(**raw)
    return config, (SweepConfig(**sweep) if sweep else None)
