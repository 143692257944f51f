"""Command-line entry point of the benchmark harness.

Subcommands:
    run          one case configuration
    convergence  a mesh or CFL sweep with error and order columns
    compare      error between two snapshot files
    export       surface grid or 1D cut of a snapshot file

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from utils.config import load_app_config
from utils.logger import add_file_handler, get_logger, set_level

from ..errors import ConfigError, NumericalAbort
from .config import CaseConfig, SweepConfig, load_case_config
from .metrics import compare_solutions, convergence_table
from .outputs import (
    read_snapshot,
    write_cut,
    write_invariants,
    write_result_table,
    write_snapshot,
    write_summary,
    write_surface,
)
from .runner import RunResult, run_case

log = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3


def run_name(cfg: CaseConfig) -> str:
    return f"{cfg.case}_{cfg.label()}_{cfg.nx}x{cfg.ny}_cfl{cfg.cfl:g}"


def measure_error(cfg: CaseConfig, result: RunResult, reference=None) -> Optional[Tuple[float, float]]:
    """Error against an explicit reference, the configured snapshot, or the exact solution."""
    if reference is None and cfg.reference:
        reference = read_snapshot(cfg.reference)
    if reference is not None:
        return compare_solutions(result.solution, reference)
    exact = cfg.definition.exact
    if exact is None:
        return None
    final_time = cfg.resolved_final_time
    solution = exact(cfg.resolved_params, final_time)
    t = result.solution.time
    try:
        return compare_solutions(result.solution, lambda x, y: solution(x, y, t))
    except ValueError as e:
        log.warning(f"No closed-form error for {cfg.case} at t={t:.6g}: {e}")
        return None


def summarise(cfg: CaseConfig, result: RunResult, error: Optional[Tuple[float, float]]) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "config": cfg.model_dump(),
        "label": cfg.label(),
        "steps": result.steps,
        "final_dt": result.last_dt,
        "final_time": result.solution.time,
        "cpu_seconds": result.cpu_seconds,
        "mass_deviation": result.mass_deviation,
    }
    if error is not None:
        summary["l2_error"], summary["linf_error"] = error
    if result.invariants is not None and result.invariants.last is not None:
        summary["invariant_deviations"] = result.invariants.last.deviations()
    return summary


def write_run_outputs(cfg: CaseConfig, result: RunResult, out_dir: Path, error) -> None:
    u = result.solution
    axis, value = cfg.definition.cut
    write_snapshot(u, out_dir / "snapshot.csv")
    write_surface(u, out_dir / "surface.csv")
    write_cut(u, axis, value, out_dir / "cut.csv")
    if result.invariants is not None:
        write_invariants(result.invariants, out_dir / "invariants.csv")
    write_summary(summarise(cfg, result, error), out_dir / "summary.json")


def command_run(args, app_config: Dict[str, Any], workers: int) -> int:
    cfg, _ = load_case_config(args.config, args.set)
    out_dir = Path(args.output_dir or cfg.output_dir) / run_name(cfg)
    if app_config.get("log_to_file", False):
        add_file_handler(str(out_dir / "run.log"))
    result = run_case(cfg, workers)
    error = measure_error(cfg, result)
    if error is not None:
        log.info(f"L2 error {error[0]:.6e}, Linf error {error[1]:.6e}")
    write_run_outputs(cfg, result, out_dir, error)
    return EXIT_OK


def sweep_configs(cfg: CaseConfig, sweep: SweepConfig) -> List[CaseConfig]:
    if sweep.kind == "spatial":
        return [cfg.model_copy(update={"nx": n, "ny": n}) for n in sweep.meshes]
    return [cfg.model_copy(update={"cfl": c}) for c in sweep.cfls]


def command_convergence(args, app_config: Dict[str, Any], workers: int) -> int:
    cfg, sweep = load_case_config(args.config, args.set)
    if sweep is None:
        raise ConfigError(f"{args.config} has no sweep block")
    out_dir = Path(args.output_dir or cfg.output_dir) / f"{cfg.case}_{cfg.label()}_{sweep.kind}"

    reference = None
    if sweep.reference:
        ref_cfg = CaseConfig(**{**cfg.model_dump(), **sweep.reference})
        log.info(f"Computing reference solution with {ref_cfg.label()} on {ref_cfg.nx}x{ref_cfg.ny}")
        reference = run_case(ref_cfg, workers).solution
        write_snapshot(reference, out_dir / "reference_snapshot.csv")

    rows = []
    for run_cfg in sweep_configs(cfg, sweep):
        result = run_case(run_cfg, workers)
        error = measure_error(run_cfg, result, reference)
        if error is None:
            raise ConfigError(f"{cfg.case} has no exact solution at T; add a sweep reference")
        rows.append((run_cfg.nx, run_cfg.cfl, error[0], error[1], result.cpu_seconds))
        write_run_outputs(run_cfg, result, out_dir / run_name(run_cfg), error)

    table = convergence_table(rows, sweep.kind)
    write_result_table(table, out_dir / "convergence.csv")
    for row in table:
        log.info(
            f"N={row.mesh} CFL={row.cfl:g}: L2 {row.l2_error:.3e} (order {row.l2_order}), "
            f"Linf {row.linf_error:.3e} (order {row.linf_order}), {row.cpu_seconds:.2f}s"
        )
    return EXIT_OK


def command_compare(args, app_config: Dict[str, Any], workers: int) -> int:
    u = read_snapshot(args.snapshot)
    reference = read_snapshot(args.reference)
    l2, linf = compare_solutions(u, reference)
    print(f"l2_error={l2:.16e}")
    print(f"linf_error={linf:.16e}")
    if args.output:
        write_summary({"snapshot": args.snapshot, "reference": args.reference,
                       "l2_error": l2, "linf_error": linf}, args.output)
    return EXIT_OK


def command_export(args, app_config: Dict[str, Any], workers: int) -> int:
    u = read_snapshot(args.snapshot)
    if args.kind == "surface":
        write_surface(u, args.output)
    else:
        write_cut(u, args.axis, args.value, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sldg-bench", description="Semi-Lagrangian DG transport benchmarks"
    )
    parser.add_argument(
        "--app-config",
        type=str,
        default=None,
        help="Path to the application config (defaults to $SLDG_CONFIG_PATH or config/sldg_config.yaml)",
    )
    parser.add_argument("--log-level", type=str, default=None, help="Logging level, e.g. DEBUG")
    parser.add_argument(
        "--single-thread",
        action="store_true",
        help="Force serial execution (timing runs and byte-identical outputs)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def case_args(p):
        p.add_argument("--config", type=str, required=True, help="Case file, e.g. config/cases/landau.yaml")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override a config entry; dotted keys address nested entries (repeatable)",
        )
        p.add_argument("--output-dir", type=str, default=None, help="Overrides output_dir")

    case_args(sub.add_parser("run", help="Run one case configuration"))
    case_args(sub.add_parser("convergence", help="Run the sweep of a case file"))

    compare = sub.add_parser("compare", help="Error between two snapshots")
    compare.add_argument("snapshot", type=str)
    compare.add_argument("reference", type=str)
    compare.add_argument("--output", type=str, default=None, help="Optional JSON result file")

    export = sub.add_parser("export", help="Surface grid or 1D cut of a snapshot")
    export.add_argument("--snapshot", type=str, required=True)
    export.add_argument("--kind", choices=["surface", "cut"], required=True)
    export.add_argument("--axis", choices=["x", "y"], default="x", help="Cut along the line axis=value")
    export.add_argument("--value", type=float, default=0.0)
    export.add_argument("--output", type=str, required=True)
    return parser


COMMANDS = {
    "run": command_run,
    "convergence": command_convergence,
    "compare": command_compare,
    "export": command_export,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        app_config = load_app_config(args.app_config)
        level = args.log_level or app_config.get("log_level")
        if level:
            set_level(level)
        workers = 1 if args.single_thread else int(app_config.get("workers", 1))
        return COMMANDS[args.command](args, app_config, workers)
    except (ConfigError, ValidationError, FileNotFoundError, KeyError) as e:
        log.error(f"Configuration error: {e}")
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as e:
        log.error(f"Numerical abort at step {e.step}: {e.cause}")
        print(f"numerical abort at step {e.step}: {e.cause}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
