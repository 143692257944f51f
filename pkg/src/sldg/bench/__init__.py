"""Benchmark harness: case registry, run loop, error tables and exporters."""

from .cases import CASES, CaseDefinition, get_case
from .config import CaseConfig, SweepConfig, load_case_config
from .metrics import ResultRow, compare_solutions, convergence_table
from .runner import RunResult, compute_dt, run_case

__all__ = [
    "CASES",
    "CaseConfig",
    "CaseDefinition",
    "ResultRow",
    "RunResult",
    "SweepConfig",
    "compare_solutions",
    "compute_dt",
    "convergence_table",
    "get_case",
    "load_case_config",
    "run_case",
]
