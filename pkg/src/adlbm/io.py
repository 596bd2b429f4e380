"""File formats: field snapshots, geometry masks, and run artifacts.

Snapshots use legacy-VTK structured points (ASCII, row-major with x
fastest), readable by common scientific viewers; values are written
with enough digits to reload bit exactly.  Geometry masks are plain
text: a header line ``nx ny``, a line with dx, then ny rows of nx 0/1
entries (0 = fluid, 1 = solid), row j giving the nodes at y = j dx.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np


def write_snapshot(path, u, dx, origin=None, name="u"):
    """Write a scalar field as a VTK structured-points snapshot."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        dims = (u.shape[0], 1, 1)
    elif u.ndim == 2:
        dims = (u.shape[0], u.shape[1], 1)
    else:
        raise ValueError("snapshots support 1D and 2D fields")
    origin = tuple(origin) if origin is not None else (0.0,) * u.ndim
    origin3 = origin + (0.0,) * (3 - len(origin))
    lines = [
        "# vtk DataFile Version 3.0",
        f"adlbm field snapshot: {name}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}",
        f"ORIGIN {origin3[0]:.17g} {origin3[1]:.17g} {origin3[2]:.17g}",
        f"SPACING {dx:.17g} {dx:.17g} {dx:.17g}",
        f"POINT_DATA {u.size}",
        f"SCALARS {name} double",
        "LOOKUP_TABLE default",
    ]
    # VTK point order: x varies fastest
    flat = u if u.ndim == 1 else u.T.reshape(-1)
    lines.extend(f"{v:.17g}" for v in flat)
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path):
    """Reload a snapshot written by :func:`write_snapshot`.

    Returns (field, dx, origin); reload is exact.
    """
    lines = Path(path).read_text().splitlines()
    dims = tuple(int(v) for v in lines[4].split()[1:])
    origin = tuple(float(v) for v in lines[5].split()[1:])
    dx = float(lines[6].split()[1])
    count = int(lines[7].split()[1])
    values = np.array([float(v) for v in lines[10:10 + count]])
    if dims[1] == 1:
        return values, dx, origin[:1]
    field = values.reshape(dims[1], dims[0]).T
    return field, dx, origin[:2]


def write_mask(path, solid, dx):
    """Write a 0/1 geometry raster (0 = fluid, 1 = solid)."""
    solid = np.asarray(solid).astype(int)
    nx, ny = solid.shape
    rows = [f"{nx} {ny}", f"{dx:.17g}"]
    for j in range(ny):
        rows.append(" ".join(str(int(v)) for v in solid[:, j]))
    Path(path).write_text("\n".join(rows) + "\n")


def read_mask(path):
    """Read a geometry raster; returns (solid boolean array (nx, ny), dx)."""
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    nx, ny = (int(v) for v in lines[0].split())
    dx = float(lines[1])
    solid = np.zeros((nx, ny), dtype=bool)
    for j in range(ny):
        row = [int(v) for v in lines[2 + j].split()]
        if len(row) != nx:
            raise ValueError(f"mask row {j} has {len(row)} entries, expected {nx}")
        solid[:, j] = np.array(row, dtype=bool)
    return solid, dx


def write_negative_mask(path, u, tol=1e-12):
    """CSV of node indices with u < -tol."""
    u = np.asarray(u)
    idx = np.argwhere(u < -tol)
    header = ",".join(f"i{d}" for d in range(u.ndim)) + ",u"
    rows = [header]
    for node in idx:
        rows.append(",".join(str(int(v)) for v in node)
                    + f",{u[tuple(node)]:.17g}")
    Path(path).write_text("\n".join(rows) + "\n")


def write_scenario_artifacts(result, out_dir, tol=1e-12):
    """Write report CSVs, snapshots, negative masks, and a JSON summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"scenario": result.scenario_id,
               "dx": result.case.dx, "dt": result.case.dt,
               "bc_method": result.bc_method,
               "reference": dict(result.case.reference),
               "meta": _jsonable(result.meta),
               "reports": {}}
    for name, report in result.reports.items():
        safe = name.replace("=", "_").replace("<", "le")
        (out / f"report_{safe}.csv").write_text(report.to_csv())
        summary["reports"][name] = _jsonable(report.summary())
    for name, fieldv in result.fields.items():
        safe = name.replace("=", "_").replace("<", "le")
        write_snapshot(out / f"field_{safe}.vtk", fieldv,
                       result.grid.dx, result.grid.origin, name=safe)
        if np.asarray(fieldv).ndim in (1, 2):
            write_negative_mask(out / f"negative_{safe}.csv", fieldv, tol=tol)
    summary["any_violation"] = result.any_violation
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return out / "summary.json"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def default_output_root():
    return os.environ.get("ADLBM_OUT", "adlbm_out")
