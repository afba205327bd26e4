"""Byte-stable dataset emission (CSV or JSON) with a JSON metadata sidecar.

Data files never contain timestamps, so repeated runs of one config produce
identical bytes; the sidecar ``<name>.meta.json`` carries the timestamp,
axis definitions and the cell-failure manifest.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .model import to_ghz
from .rates import TRUNCATION_RULE

AXIS_HEADERS = {
    "detuning_dc": "detuning_dc[mPhi0]",
    "phi_rf": "phi_rf[mPhi0]",
    "omega": "omega/2pi[GHz]",
    "gamma2": "gamma2/2pi[GHz]",
}
_TO_FILE_UNITS = {"omega": to_ghz, "gamma2": to_ghz}


def file_units(name, values):
    conv = _TO_FILE_UNITS.get(name)
    arr = np.asarray(values, dtype=float)
    return conv(arr) if conv else arr


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def provenance_line(config_hash: str, method: str) -> str:
    trunc = ",".join(f"{k}:{v}" for k, v in TRUNCATION_RULE.items())
    return f"# config_hash={config_hash} truncation={trunc} method={method}"


def render_table(columns, rows, config_hash, method, fmt="csv") -> str:
    """Render a table as CSV (provenance comment + one header line) or JSON."""
    if fmt == "json":
        doc = {
            "config_hash": config_hash,
            "truncation": dict(TRUNCATION_RULE),
            "method": method,
            "columns": list(columns),
            "rows": [[float(v) if not isinstance(v, (bool, np.bool_)) else bool(v) for v in r] for r in rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write(provenance_line(config_hash, method) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def sweep_rows(result):
    """Long-format rows over the grid, last axis varying fastest."""
    grid = result.grid
    names = grid.names
    coords = [file_units(n, grid.axes[n]) for n in names]
    columns = [AXIS_HEADERS[n] for n in names] + ["p11", "failed"]
    rows = []
    for index in np.ndindex(*grid.shape):
        rows.append([coords[k][i] for k, i in enumerate(index)] + [result.p11[index], bool(result.failed[index])])
    return columns, rows


def reduced_rows(result, equilibrium=None):
    """Rows of the minimum over the amplitude axis for every other grid point."""
    best, arg, edge = result.minimize("phi_rf")
    names = [n for n in result.grid.names if n != "phi_rf"]
    coords = [file_units(n, result.grid.axes[n]) for n in names]
    columns = [AXIS_HEADERS[n] for n in names] + ["p11_min", "phi_rf_star[mPhi0]", "at_edge"]
    if equilibrium is not None:
        columns.append("p11_equilibrium")
    rows = []
    for index in np.ndindex(*best.shape):
        row = [coords[k][i] for k, i in enumerate(index)] + [best[index], arg[index], bool(edge[index])]
        if equilibrium is not None:
            row.append(equilibrium(dict(zip(names, (result.grid.axes[n][i] for n, i in zip(names, index))))))
        rows.append(row)
    return columns, rows


def metadata_text(meta: dict) -> str:
    return json.dumps(meta, indent=1, sort_keys=True, default=str) + "\n"
