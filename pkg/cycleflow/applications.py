"""Analyses built on the cycle-flow machinery: closing a tie-switch in a radial grid,
splitting a transaction into scheduled and unscheduled (loop) flows, and screening
single outages with LODFs.
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sps

import cfconstants
from .conventional import SensitivityMatrix, assemble_operators, ptdf_conventional
from .dual import build_cycle_operator
from .errors import EquivalenceError, GridValidationError, ScheduleError, SchemaError, TopologyError
from .grid_io import Branch, Grid
from .topology import CycleBasis, build_incidence, build_spanning_tree


@dataclass(frozen=True, eq=False)
class TieSwitchDelta:
    """PTDF change caused by closing one branch in a radial grid.

    Rows and columns refer to the closed grid; the new branch is the last line.
    ``overlap_ratios[r]`` is the signed share of the induced cycle's reactance that lies on
    the tree path slack -> r.
    """
    induced_cycle: np.ndarray
    delta_ptdf: np.ndarray
    overlap_ratios: np.ndarray
    closed_grid: Grid
    max_deviation: float


@dataclass(frozen=True, eq=False)
class FlowSplit:
    schedule: np.ndarray
    source: int
    sink: int
    power: float
    scheduled: np.ndarray
    unscheduled: np.ndarray
    actual: np.ndarray


def close_branch(tree_grid: Grid, new_branch: Branch) -> Grid:
    if new_branch.tail == new_branch.head:
        raise SchemaError("a tie-switch must connect two different buses")
    for bus in (new_branch.tail, new_branch.head):
        if not 0 <= bus < tree_grid.n_nodes:
            raise SchemaError(f"bus index {bus} is not part of grid {tree_grid.name}")
    if any(branch.endpoints() == new_branch.endpoints() for branch in tree_grid.branches):
        raise SchemaError(f"buses {tree_grid.buses[new_branch.tail].id} and {tree_grid.buses[new_branch.head].id} "
                          f"are already connected")
    closing = Branch.from_reactance(tree_grid.n_lines, new_branch.tail, new_branch.head, new_branch.reactance)
    return Grid(tree_grid.buses, tree_grid.branches + (closing,), tree_grid.slack, f"{tree_grid.name}+tie")


def tie_switch_delta(tree_grid: Grid, new_branch: Branch, slack=None, mode=cfconstants.MODE_SPARSE) -> TieSwitchDelta:
    """Closed-form PTDF change for closing ``new_branch`` in the radial grid ``tree_grid``.

    With a single induced cycle c the cycle system is a scalar and
    delta PTDF = -c (c^t X_d T) / (c^t X_d c). The result is checked against recomputing the
    PTDF of the closed grid and subtracting the radial PTDF.
    """
    if not tree_grid.is_tree():
        raise TopologyError(f"grid {tree_grid.name} has {tree_grid.n_cycles} cycles; tie-switch analysis needs a radial grid")
    s = tree_grid.slack if slack is None else slack
    closed = close_branch(tree_grid, new_branch).with_slack(s)
    new_line = tree_grid.n_lines

    T = np.zeros((closed.n_lines, closed.n_nodes))
    T[:new_line, :] = build_spanning_tree(tree_grid, s).dense()
    cycle = T[:, new_branch.tail] - T[:, new_branch.head]
    cycle[new_line] = 1.0

    reactances = closed.reactances
    ratios = (cycle * reactances) @ T / float(np.abs(cycle) @ reactances)
    delta = -np.outer(cycle, ratios)

    closed_ptdf = ptdf_conventional(assemble_operators(closed, build_incidence(closed)), s, mode).values
    radial_ptdf = ptdf_conventional(assemble_operators(tree_grid, build_incidence(tree_grid)), s, mode).values
    recomputed = closed_ptdf.copy()
    recomputed[:new_line, :] -= radial_ptdf
    deviation = float(np.max(np.abs(recomputed - delta)))
    if deviation > cfconstants.IDENTITY_TOL:
        raise EquivalenceError(f"tie-switch closed form deviates from recomputation by {deviation:.3e}")

    logging.info(f"Closing {closed.buses[new_branch.tail].id}-{closed.buses[new_branch.head].id} "
                 f"induces a cycle of {int(np.count_nonzero(cycle))} lines")
    return TieSwitchDelta(cycle.astype(np.int64), delta, ratios, closed, deviation)


def schedule_from_path(grid: Grid, bus_ids: Sequence[int]) -> np.ndarray:
    """Unit transport vector along a path of external bus ids, signed by line orientation."""
    if len(bus_ids) < 2:
        raise ScheduleError("a schedule path needs at least two buses")
    lines = {branch.endpoints(): branch for branch in grid.branches}
    schedule = np.zeros(grid.n_lines)
    for from_id, to_id in zip(bus_ids[:-1], bus_ids[1:]):
        tail, head = grid.index_of(from_id), grid.index_of(to_id)
        branch = lines.get(frozenset((tail, head)))
        if branch is None:
            raise ScheduleError(f"no line between buses {from_id} and {to_id}", from_id)
        schedule[branch.index] += 1.0 if branch.tail == tail else -1.0
    return schedule


def schedule_endpoints(grid: Grid, schedule: np.ndarray):
    """Returns (source, sink) if ``schedule`` moves one unit from source to sink, else raises."""
    schedule = np.asarray(schedule, dtype=float)
    if schedule.shape != (grid.n_lines,):
        raise ScheduleError(f"schedule has {schedule.shape} entries, grid has {grid.n_lines} lines")
    net = build_incidence(grid).matrix @ schedule
    source, sink = int(np.argmax(net)), int(np.argmin(net))
    expected = np.zeros(grid.n_nodes)
    expected[source], expected[sink] = 1.0, -1.0
    violated = np.flatnonzero(np.abs(net - expected) > cfconstants.IDENTITY_TOL)
    if violated.size or source == sink:
        bus = int(violated[0]) if violated.size else source
        bus_id = grid.buses[bus].id
        raise ScheduleError(f"schedule does not transport one unit between two buses; "
                            f"bus {bus_id} has net {net[bus]:+.6g}", bus_id)
    return source, sink


def unscheduled_flows(grid: Grid, basis: CycleBasis, schedule, power, mode=cfconstants.MODE_SPARSE,
                      operator=None) -> FlowSplit:
    """Splits the flows of ``power`` MW sent along ``schedule`` into scheduled and loop flows.

    F_unscheduled = -P C (C^t X_d C)^-1 C^t X_d pi is a pure cycle flow.
    """
    schedule = np.asarray(schedule, dtype=float)
    source, sink = schedule_endpoints(grid, schedule)
    scheduled = power * schedule
    if basis.n_cycles == 0:
        unscheduled = np.zeros(grid.n_lines)
    else:
        operator = operator or build_cycle_operator(grid, basis, mode)
        strengths = operator.solve(operator.Xf @ scheduled)
        unscheduled = -np.asarray(operator.C @ strengths)
    return FlowSplit(schedule, source, sink, power, scheduled, unscheduled, scheduled + unscheduled)


def post_outage_flows(lodf: SensitivityMatrix, base_flows, line) -> np.ndarray:
    """Flows after line ``line`` trips: F_k + LODF[k, line] F_line, zero on the tripped line."""
    if lodf.kind != cfconstants.LODF:
        raise ValueError(f"expected an LODF matrix, got {lodf.kind}")
    base_flows = np.asarray(base_flows, dtype=float)
    if base_flows.shape != (lodf.shape[0],):
        raise GridValidationError(f"expected {lodf.shape[0]} base flows, got {base_flows.shape}")
    if not 0 <= line < lodf.shape[1]:
        raise GridValidationError(f"line {line} out of range")
    if line in lodf.undefined_columns:
        raise TopologyError(f"outage of line {line} islands the grid")
    flows = base_flows + lodf.values[:, line] * base_flows[line]
    flows[line] = 0.0
    return flows


def is_pure_cycle_flow(grid: Grid, flows) -> bool:
    net = sps.csc_matrix(build_incidence(grid).matrix, dtype=float) @ np.asarray(flows, dtype=float)
    return bool(np.all(np.abs(net) <= cfconstants.IDENTITY_TOL))
