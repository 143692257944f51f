"""CSV and JSON writers for tables, invariant series, snapshots, cuts and surfaces.

Floats are written with 17 significant digits so snapshots read back exactly.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from utils.logger import get_logger

from ..basis.modal import mode_indices
from ..mesh import build_mesh_2d
from ..models.invariants import QUANTITIES, InvariantSeries
from ..solution import Solution2D
from .metrics import ResultRow

log = get_logger(__name__)

PathLike = Union[str, Path]

SNAPSHOT_FORMAT = "sldg-snapshot-1"
TABLE_COLUMNS = ["mesh", "cfl", "l2_error", "l2_order", "linf_error", "linf_order", "cpu_seconds"]
INVARIANT_COLUMNS = ["time", "L1_dev", "L2_dev", "energy_dev", "entropy_or_enstrophy_dev"]
CUT_POINTS_PER_CELL = 4


def format_float(value: float) -> str:
    return f"{float(value):.16e}"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_rows(path: PathLike, fieldnames: List[str], rows: Iterable[Dict[str, Any]]) -> Path:
    path = _prepare(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in fieldnames})
    log.info(f"Wrote {path}")
    return path


def write_result_table(rows: Sequence[ResultRow], path: PathLike) -> Path:
    """Convergence table; undefined orders are blank."""
    return _write_rows(path, TABLE_COLUMNS, (row.model_dump() for row in rows))


def write_invariants(series: InvariantSeries, path: PathLike) -> Path:
    """Relative deviations of the invariants at every recorded time."""
    names = dict(zip(QUANTITIES, INVARIANT_COLUMNS[1:]))

    def rows():
        for record in series.records:
            row = {"time": record.time}
            row.update({names[q]: v for q, v in record.deviations().items()})
            yield row

    return _write_rows(path, INVARIANT_COLUMNS, rows())


def write_snapshot(u: Solution2D, path: PathLike) -> Path:
    """Modal coefficients, one row per cell, with a ``#`` metadata header."""
    path = _prepare(path)
    modes = mode_indices(u.k, u.space)
    (x_lo, x_hi), (y_lo, y_hi) = u.mesh.domain
    header = {
        "format": SNAPSHOT_FORMAT,
        "time": format_float(u.time),
        "k": u.k,
        "space": u.space,
        "nx": u.mesh.nx,
        "ny": u.mesh.ny,
        "domain_x": f"{format_float(x_lo)},{format_float(x_hi)}",
        "domain_y": f"{format_float(y_lo)},{format_float(y_hi)}",
        "ordering": " ".join(f"{a}:{b}" for a, b in modes),
    }
    columns = ["ix", "iy"] + [f"c{m}" for m in range(len(modes))]
    with open(path, "w", newline="", encoding="utf-8") as f:
        for key, value in header.items():
            f.write(f"# {key}={value}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for ix in range(u.mesh.nx):
            for iy in range(u.mesh.ny):
                writer.writerow([ix, iy] + [format_float(c) for c in u.coeffs[ix, iy]])
    log.info(f"Wrote snapshot {path}")
    return path


def _read_header(path: Path) -> Dict[str, str]:
    header = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
    return header


def read_snapshot(path: PathLike) -> Solution2D:
    """Inverse of :func:`write_snapshot`.

    Raises:
        ValueError: If the header is missing fields or the mode ordering differs.
    """
    path = Path(path)
    header = _read_header(path)
    if header.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"{path} is not a snapshot file (format={header.get('format')!r})")
    k, space = int(header["k"]), header["space"]
    nx, ny = int(header["nx"]), int(header["ny"])
    expected = " ".join(f"{a}:{b}" for a, b in mode_indices(k, space))
    if header.get("ordering") != expected:
        raise ValueError(f"{path} has mode ordering {header.get('ordering')!r}, expected {expected!r}")
    domain_x = tuple(float(v) for v in header["domain_x"].split(","))
    domain_y = tuple(float(v) for v in header["domain_y"].split(","))
    mesh = build_mesh_2d(domain_x, domain_y, nx, ny)

    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    coeffs = np.zeros((nx, ny, len(frame.columns) - 2))
    values = frame[[c for c in frame.columns if c.startswith("c")]].to_numpy(dtype=float)
    coeffs[frame["ix"].to_numpy(), frame["iy"].to_numpy()] = values
    return Solution2D(mesh=mesh, k=k, space=space, coeffs=coeffs, time=float(header["time"]))


def write_surface(u: Solution2D, path: PathLike) -> Path:
    """Values at cell centres, one row per cell: x, y, value."""
    mesh = u.mesh
    x, y = np.meshgrid(mesh.mesh_x.centers, mesh.mesh_y.centers, indexing="ij")
    values = u.evaluate(x, y)
    rows = (
        {"x": x[i, j], "y": y[i, j], "value": values[i, j]}
        for i in range(mesh.nx)
        for j in range(mesh.ny)
    )
    return _write_rows(path, ["x", "y", "value"], rows)


def cut_samples(u: Solution2D, axis: str, value: float):
    """Coordinates along a line ``axis = value`` at 4 evenly spaced points per crossed cell."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    along = u.mesh.mesh_y if axis == "x" else u.mesh.mesh_x
    offsets = (np.arange(CUT_POINTS_PER_CELL) + 0.5) / CUT_POINTS_PER_CELL
    s = (along.faces[:-1, None] + along.dx * offsets[None, :]).ravel()
    fixed = np.full_like(s, float(value))
    values = u.evaluate(fixed, s) if axis == "x" else u.evaluate(s, fixed)
    return s, values


def write_cut(u: Solution2D, axis: str, value: float, path: PathLike) -> Path:
    """1D cut along the line ``axis = value``; columns are the free coordinate and the value."""
    s, values = cut_samples(u, axis, value)
    name = "y" if axis == "x" else "x"
    return _write_rows(path, [name, "value"], ({name: a, "value": b} for a, b in zip(s, values)))


def read_table(path: PathLike) -> pd.DataFrame:
    """Read any CSV written here with round-trip float parsing."""
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def write_summary(summary: Dict[str, Any], path: PathLike) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    log.info(f"Wrote {path}")
    return path
