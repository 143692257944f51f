"""Tests for the benchmark harness.

This file contains tests for:
- Time-step selection and the run loop
- Error norms and convergence tables
- Snapshot, cut, surface and table files
- Case configuration validation and overrides
- Command-line exit codes
"""

import json
import math
from types import SimpleNamespace

import numpy as np
import pytest
import yaml
from pydantic import ValidationError

from sldg.bench import runner
from sldg.bench.cases import CASES, get_case
from sldg.bench.cli import EXIT_ABORT, EXIT_CONFIG, EXIT_OK, main
from sldg.bench.config import CaseConfig, SweepConfig, load_case_config
from sldg.bench.metrics import compare_solutions, convergence_table
from sldg.bench.outputs import (
    SNAPSHOT_FORMAT,
    read_snapshot,
    read_table,
    write_cut,
    write_invariants,
    write_result_table,
    write_snapshot,
    write_surface,
)
from sldg.bench.runner import compute_dt, run_case, truncate_step
from sldg.errors import CharacteristicCrossingError, ConfigError, NumericalAbort
from sldg.mesh import build_mesh_2d
from sldg.models import InvariantRecord, InvariantSeries
from sldg.solution import Solution2D


def tiny_linear(**changes):
    base = dict(case="linear-const", scheme="nonsplit", k=1, nx=4, ny=4, cfl=1.0, final_time=0.2)
    base.update(changes)
    return CaseConfig(**base)


@pytest.fixture
def app_config_file(tmp_path):
    path = tmp_path / "app.yaml"
    path.write_text(yaml.safe_dump({"log_level": "INFO", "log_to_file": False, "workers": 1}))
    return str(path)


@pytest.fixture
def case_file(tmp_path):
    path = tmp_path / "case.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "case": "linear-const",
                "scheme": "nonsplit",
                "k": 1,
                "nx": 4,
                "ny": 4,
                "cfl": 1.0,
                "final_time": 0.2,
                "output_dir": str(tmp_path / "outputs"),
                "sweep": {"meshes": [4, 8]},
            }
        )
    )
    return str(path)


# ============================================================================
# Runner Tests
# ============================================================================
# Step size, final-step truncation and whole runs


def test_compute_dt():
    """Test dt = CFL / (a/dx + b/dy)."""
    mesh = build_mesh_2d((0.0, 1.0), (0.0, 1.0), 10, 20)
    assert compute_dt(1.0, mesh, 1.0, 1.0) == pytest.approx(1.0 / 30.0)
    assert compute_dt(3.0, mesh, 2.0, 0.0) == pytest.approx(0.15)


def test_compute_dt_rejects_zero_speed():
    """Test that a motionless field has no CFL step."""
    mesh = build_mesh_2d((0.0, 1.0), (0.0, 1.0), 4, 4)
    with pytest.raises(ValueError):
        compute_dt(1.0, mesh, 0.0, 0.0)


def test_truncate_step():
    """Test that the last step lands on the final time."""
    assert truncate_step(0.95, 1.0, 0.1) == pytest.approx(0.05)
    assert truncate_step(0.2, 1.0, 0.1) == 0.1


def test_run_case_linear_lands_on_final_time():
    """Test step count, final time and mass of a short linear run."""
    cfg = tiny_linear(cfl=0.1, final_time=0.3)
    result = run_case(cfg)
    dt = 0.1 / (2.0 / (0.5 * math.pi))
    assert result.steps == math.ceil(0.3 / dt)
    assert result.solution.time == pytest.approx(0.3)
    assert result.last_dt == pytest.approx(0.3 - (result.steps - 1) * dt)
    assert abs(result.solution.mass - result.initial.mass) < 1e-12
    assert result.invariants is None


def test_run_case_vlasov_records_invariants():
    """Test that nonlinear runs record one invariant set per step plus the initial one."""
    cfg = CaseConfig(case="landau", scheme="split", k=1, nx=4, ny=4, cfl=1.0, final_time=0.5)
    result = run_case(cfg)
    assert len(result.invariants) == result.steps + 1
    assert abs(result.mass_deviation) < 1e-12


def test_run_case_times_the_loop_with_the_wall_clock(monkeypatch):
    """Test that the loop is timed with the monotonic wall clock, not process CPU time."""
    ticks = iter([100.0, 102.5])

    def process_time():
        raise AssertionError("process CPU time sums worker threads")

    clock = SimpleNamespace(perf_counter=lambda: next(ticks), process_time=process_time)
    monkeypatch.setattr(runner, "time", clock)
    result = run_case(tiny_linear())
    assert result.cpu_seconds == pytest.approx(2.5)


# ============================================================================
# Metrics Tests
# ============================================================================
# RMS and maximum errors, orders of convergence


def test_compare_solutions_rms(mesh_2d):
    """Test that a unit offset has RMS and maximum error 1."""
    u = Solution2D.project(lambda x, y: np.ones_like(x), mesh_2d, 1, "P")
    l2, linf = compare_solutions(u, lambda x, y: np.zeros_like(x))
    assert l2 == pytest.approx(1.0)
    assert linf == pytest.approx(1.0)
    l2, linf = compare_solutions(u, u)
    assert l2 == pytest.approx(0.0, abs=1e-14)


def test_compare_solutions_rejects_other_domain(mesh_2d, unit_mesh_2d):
    """Test that a reference snapshot must share the domain."""
    u = Solution2D.project(lambda x, y: x, mesh_2d, 1, "P")
    reference = Solution2D.project(lambda x, y: x, unit_mesh_2d, 1, "P")
    with pytest.raises(ValueError):
        compare_solutions(u, reference)


def test_spatial_convergence_table():
    """Test log2 orders under mesh doubling."""
    rows = [(20, 2.0, 1e-2, 2e-2, 0.1), (40, 2.0, 1.25e-3, 5e-3, 0.4)]
    table = convergence_table(rows, "spatial")
    assert table[0].l2_order is None
    assert table[1].l2_order == pytest.approx(3.0)
    assert table[1].linf_order == pytest.approx(2.0)


def test_temporal_convergence_table():
    """Test orders measured against the CFL ratio."""
    rows = [(64, 1.0, 1e-4, 1e-4, 1.0), (64, 2.0, 4e-4, 8e-4, 0.5)]
    table = convergence_table(rows, "temporal")
    assert table[1].l2_order == pytest.approx(2.0)
    assert table[1].linf_order == pytest.approx(3.0)


def test_convergence_table_zero_error_has_no_order():
    """Test that a zero error leaves the order undefined."""
    rows = [(10, 1.0, 0.0, 0.0, 0.1), (20, 1.0, 0.0, 0.0, 0.1)]
    assert convergence_table(rows)[1].l2_order is None


def test_convergence_table_validation():
    """Test that a table needs two rows and a known kind."""
    with pytest.raises(ValueError):
        convergence_table([(10, 1.0, 1e-2, 1e-2, 0.1)])
    with pytest.raises(ValueError):
        convergence_table([(10, 1.0, 1e-2, 1e-2, 0.1)] * 2, kind="spectral")


# ============================================================================
# Output File Tests
# ============================================================================
# Snapshots read back exactly; cuts, surfaces and tables have fixed columns


def test_snapshot_round_trip(tmp_path, wave_p2):
    """Test that a written snapshot reads back bit for bit."""
    u = wave_p2.with_coeffs(wave_p2.coeffs / 3.0, time=1.0 / 7.0)
    path = write_snapshot(u, tmp_path / "snap" / "snapshot.csv")
    assert path.read_text().startswith(f"# format={SNAPSHOT_FORMAT}\n")
    back = read_snapshot(path)
    np.testing.assert_array_equal(back.coeffs, u.coeffs)
    assert back.time == u.time
    assert (back.k, back.space, back.mesh.shape) == (2, "P", (8, 8))


def test_read_snapshot_rejects_other_files(tmp_path):
    """Test that files without the snapshot header are refused."""
    path = tmp_path / "table.csv"
    path.write_text("mesh,cfl\n10,1.0\n")
    with pytest.raises(ValueError):
        read_snapshot(path)


def test_cut_along_x_line(tmp_path, unit_mesh_2d):
    """Test a cut x = 0.3 of u = y with four points per cell."""
    u = Solution2D.project(lambda x, y: y, unit_mesh_2d, 1, "Q")
    frame = read_table(write_cut(u, "x", 0.3, tmp_path / "cut.csv"))
    assert list(frame.columns) == ["y", "value"]
    assert len(frame) == 16
    np.testing.assert_allclose(frame["value"], frame["y"], atol=1e-14)


def test_surface_has_one_row_per_cell(tmp_path, unit_mesh_2d):
    """Test surface rows at the cell centres."""
    u = Solution2D.project(lambda x, y: x + y, unit_mesh_2d, 1, "P")
    frame = read_table(write_surface(u, tmp_path / "surface.csv"))
    assert len(frame) == 16
    np.testing.assert_allclose(frame["value"], frame["x"] + frame["y"], atol=1e-14)


def test_result_table_blank_orders(tmp_path):
    """Test that undefined orders are written as blanks."""
    table = convergence_table([(20, 2.0, 1e-2, 2e-2, 0.1), (40, 2.0, 2.5e-3, 5e-3, 0.4)])
    frame = read_table(write_result_table(table, tmp_path / "convergence.csv"))
    assert math.isnan(frame["l2_order"][0])
    assert frame["l2_order"][1] == pytest.approx(2.0)


def test_invariants_file_columns(tmp_path):
    """Test the invariant deviation columns."""
    series = InvariantSeries()
    for t, energy in ((0.0, 2.0), (0.5, 2.5)):
        series.append(
            InvariantRecord(
                time=t, l1_norm=1.0, l2_norm=1.0, energy=energy, entropy_or_enstrophy=1.0,
                label="enstrophy",
            )
        )
    frame = read_table(write_invariants(series, tmp_path / "invariants.csv"))
    assert list(frame.columns) == ["time", "L1_dev", "L2_dev", "energy_dev", "entropy_or_enstrophy_dev"]
    assert frame["energy_dev"][1] == pytest.approx(0.25)


# ============================================================================
# Configuration Tests
# ============================================================================
# CaseConfig and SweepConfig validation, overrides and the mesh shorthand


@pytest.mark.parametrize(
    "changes",
    [
        {"case": "unknown-case"},
        {"scheme": "split", "qc": True},
        {"limiter": True},
        {"k": 3},
        {"params": {"alpha": 0.1}},
        {"integrator": "midpoint"},
        {"cfl": 0.0},
    ],
)
def test_case_config_rejects(changes):
    """Test invalid combinations of scheme options."""
    with pytest.raises(ValidationError):
        tiny_linear(**changes)


def test_case_config_derived_values():
    """Test labels, spaces and defaulted degrees."""
    cfg = CaseConfig(case="landau", scheme="nonsplit", k=2, nx=8, ny=8, cfl=5.0, qc=True)
    assert cfg.label() == "P2-QC"
    assert (cfg.space, cfg.mode, cfg.r, cfg.temporal_order) == ("P", "qc", 2, 3)
    assert cfg.resolved_final_time == 40.0
    assert cfg.resolved_params["alpha"] == 0.5
    split = tiny_linear(scheme="split")
    assert split.label() == "Q1-split"
    assert split.temporal_order == 2


@pytest.mark.parametrize(
    "sweep",
    [{}, {"meshes": [10, 20], "cfls": [1.0, 2.0]}, {"meshes": [20]}, {"cfls": [2.0, 1.0]}],
)
def test_sweep_config_rejects(sweep):
    """Test that a sweep names exactly one increasing sequence."""
    with pytest.raises(ValidationError):
        SweepConfig(**sweep)


def test_load_case_config_overrides(case_file):
    """Test overrides, the mesh shorthand and the sweep block."""
    cfg, sweep = load_case_config(case_file, ["mesh=6", "cfl=1.5", "sweep.meshes=[6, 12, 24]"])
    assert (cfg.nx, cfg.ny, cfg.cfl) == (6, 6, 1.5)
    assert sweep.kind == "spatial"
    assert sweep.meshes == [6, 12, 24]


def test_load_case_config_errors(tmp_path, case_file):
    """Test that missing files and malformed overrides are configuration errors."""
    with pytest.raises(ConfigError):
        load_case_config(str(tmp_path / "missing.yaml"))
    with pytest.raises(ConfigError):
        load_case_config(case_file, ["cfl"])


def test_get_case_unknown():
    """Test that unknown cases list the known ones."""
    with pytest.raises(KeyError, match="linear-const"):
        get_case("vortex")
    assert "kelvin-helmholtz" in CASES


# ============================================================================
# CLI Tests
# ============================================================================
# Exit codes and files written by each subcommand


def test_cli_run_writes_outputs(tmp_path, app_config_file, case_file):
    """Test a short run end to end."""
    out = tmp_path / "runs"
    code = main(["--app-config", app_config_file, "run", "--config", case_file, "--output-dir", str(out)])
    assert code == EXIT_OK
    run_dir = out / "linear-const_P1_4x4_cfl1"
    for name in ("snapshot.csv", "surface.csv", "cut.csv", "summary.json"):
        assert (run_dir / name).exists()
    summary = json.loads((run_dir / "summary.json").read_text())
    assert summary["final_time"] == pytest.approx(0.2)
    assert summary["l2_error"] < 0.5
    assert summary["label"] == "P1"


@pytest.mark.slow
def test_cli_convergence_writes_table(tmp_path, app_config_file, case_file):
    """Test a two-mesh sweep."""
    out = tmp_path / "sweep"
    code = main(
        ["--app-config", app_config_file, "convergence", "--config", case_file, "--output-dir", str(out)]
    )
    assert code == EXIT_OK
    frame = read_table(out / "linear-const_P1_spatial" / "convergence.csv")
    assert list(frame["mesh"]) == [4, 8]
    assert frame["l2_error"][1] < frame["l2_error"][0]


def test_cli_config_error_exit_code(tmp_path, app_config_file, case_file):
    """Test that invalid configurations exit with code 2."""
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"case": "nope", "scheme": "split", "k": 1, "nx": 4, "ny": 4, "cfl": 1.0}))
    assert main(["--app-config", app_config_file, "run", "--config", str(bad)]) == EXIT_CONFIG
    missing = str(tmp_path / "missing.yaml")
    assert main(["--app-config", app_config_file, "run", "--config", missing]) == EXIT_CONFIG
    assert main(["--app-config", app_config_file, "run", "--config", case_file, "--set", "k=7"]) == EXIT_CONFIG


def test_cli_numerical_abort_exit_code(monkeypatch, app_config_file, case_file):
    """Test that a failed step exits with code 3."""

    def failing_run(cfg, workers=1):
        raise NumericalAbort(4, CharacteristicCrossingError("feet crossed", cell=(1, 2)))

    monkeypatch.setattr("sldg.bench.cli.run_case", failing_run)
    assert main(["--app-config", app_config_file, "run", "--config", case_file]) == EXIT_ABORT


def test_cli_compare_and_export(tmp_path, capsys, app_config_file, mesh_2d):
    """Test compare output and cut export of snapshot files."""
    u = Solution2D.project(lambda x, y: np.sin(x), mesh_2d, 1, "Q")
    a = write_snapshot(u, tmp_path / "a.csv")
    b = write_snapshot(u.with_coeffs(u.coeffs + np.eye(4)[0]), tmp_path / "b.csv")

    assert main(["--app-config", app_config_file, "compare", str(a), str(b)]) == EXIT_OK
    lines = dict(
        line.split("=", 1) for line in capsys.readouterr().out.splitlines() if "_error=" in line
    )
    assert float(lines["l2_error"]) == pytest.approx(1.0)
    assert float(lines["linf_error"]) == pytest.approx(1.0)

    cut = tmp_path / "cut.csv"
    args = ["--app-config", app_config_file, "export", "--snapshot", str(a), "--kind", "cut"]
    assert main(args + ["--axis", "y", "--value", "1.0", "--output", str(cut)]) == EXIT_OK
    assert list(read_table(cut).columns) == ["x", "value"]
