"""Rendering of results as CSV or JSON text."""
import json
import logging
import math

import numpy as np
import pandas as pd

import cfconstants
from .conventional import SensitivityMatrix
from .dual import FlowDecomposition
from .grid_io import Grid
from .topology import CycleBasis


def _check_format(fmt):
    if fmt not in cfconstants.FORMATS:
        raise ValueError(f"unknown format {fmt}; choose from {cfconstants.FORMATS}")


def _jsonable(values):
    return [[None if math.isnan(v) else float(v) for v in row] for row in np.asarray(values, dtype=float)]


def line_labels(grid: Grid):
    return [f"{grid.buses[branch.tail].id}-{grid.buses[branch.head].id}" for branch in grid.branches]


def matrix_to_frame(grid: Grid, matrix: SensitivityMatrix) -> pd.DataFrame:
    """Rows are lines (index), columns are bus ids for a PTDF and line indices otherwise."""
    columns = list(grid.bus_ids) if matrix.kind == cfconstants.PTDF else list(range(grid.n_lines))
    frame = pd.DataFrame(matrix.values, index=pd.RangeIndex(grid.n_lines, name="line"), columns=columns)
    frame.insert(0, "branch", line_labels(grid))
    return frame


def render_matrix(grid: Grid, matrix: SensitivityMatrix, fmt=cfconstants.FORMAT_CSV) -> str:
    _check_format(fmt)
    if fmt == cfconstants.FORMAT_CSV:
        return matrix_to_frame(grid, matrix).to_csv(na_rep="")
    columns = [int(v) for v in grid.bus_ids] if matrix.kind == cfconstants.PTDF else list(range(grid.n_lines))
    data = {
        "kind": matrix.kind,
        "method": matrix.method,
        "slack": grid.buses[matrix.slack].id if matrix.slack is not None else None,
        "rows": list(range(grid.n_lines)),
        "columns": columns,
        "values": _jsonable(matrix.values),
        "undefined_columns": sorted(matrix.undefined_columns),
    }
    return json.dumps(data, indent=2)


def decomposition_frames(grid: Grid, decomposition: FlowDecomposition, basis: CycleBasis):
    lines = pd.DataFrame({
        "branch": line_labels(grid),
        "direct": decomposition.direct,
        "total": decomposition.total,
    }, index=pd.RangeIndex(grid.n_lines, name="line"))
    C = basis.dense()
    cycles = pd.DataFrame({
        "chord": basis.chords if basis.chords else [None] * basis.n_cycles,
        "strength": decomposition.cycle_strengths,
        "lines": [" ".join(f"{int(C[l, c]):+d}*{l}" for l in np.flatnonzero(C[:, c])) for c in range(basis.n_cycles)],
    }, index=pd.RangeIndex(basis.n_cycles, name="cycle"))
    return lines, cycles


def render_decomposition(grid: Grid, decomposition: FlowDecomposition, basis: CycleBasis,
                         fmt=cfconstants.FORMAT_CSV) -> str:
    """Direct path flows, cycle strengths with the basis they refer to, and total flows."""
    _check_format(fmt)
    lines, cycles = decomposition_frames(grid, decomposition, basis)
    if fmt == cfconstants.FORMAT_CSV:
        return lines.to_csv() + "\n" + cycles.to_csv()
    data = {
        "source": grid.buses[decomposition.source].id,
        "sink": grid.buses[decomposition.sink].id,
        "power": decomposition.power,
        "lines": json.loads(lines.reset_index().to_json(orient="records")),
        "cycles": json.loads(cycles.reset_index().to_json(orient="records")),
    }
    return json.dumps(data, indent=2)


def render_records(records, fmt=cfconstants.FORMAT_CSV, columns=None) -> str:
    """A list of flat dicts as a CSV table or a JSON array."""
    _check_format(fmt)
    frame = pd.DataFrame(list(records), columns=columns)
    if fmt == cfconstants.FORMAT_CSV:
        return frame.to_csv(index=False)
    return json.dumps(json.loads(frame.to_json(orient="records")), indent=2)


def write_output(text, out=None):
    if out is None:
        print(text, end="" if text.endswith("\n") else "\n")
        return
    with open(out, "w", encoding="utf-8") as fp:
        fp.write(text)
    logging.info(f"Wrote {out}")
