"""Reading, normalizing and writing grid descriptions.

Two input formats are understood: the bus/branch subset of a MATPOWER case file and a
small native JSON format. Both end up in the same immutable ``Grid`` after parallel lines
are merged, self-loops dropped and connectivity checked.
"""
import json
import logging
import os
import re
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import requests
from requests.adapters import HTTPAdapter
from urllib3 import Retry

import cfconstants
from .errors import CaseParseError, ConnectivityError, SchemaError, UnsupportedBranchError

# MATPOWER column indices (0-based)
BUS_I = 0
BUS_TYPE = 1
REF_BUS_TYPE = 3
ISOLATED_BUS_TYPE = 4
F_BUS = 0
T_BUS = 1
BR_X = 3
SHIFT = 9
BR_STATUS = 10


@dataclass(frozen=True)
class Bus:
    id: int
    index: int


@dataclass(frozen=True)
class Branch:
    """Oriented line from ``tail`` to ``head`` (internal bus indices)."""
    index: int
    tail: int
    head: int
    susceptance: float
    reactance: float

    @classmethod
    def from_reactance(cls, index, tail, head, reactance):
        # susceptance is always derived from the stored reactance, so x * b == 1 up to rounding
        return cls(index, tail, head, 1.0 / reactance, reactance)

    def endpoints(self):
        return frozenset((self.tail, self.head))


@dataclass(frozen=True)
class Grid:
    buses: Tuple[Bus, ...]
    branches: Tuple[Branch, ...]
    slack: int
    name: str = "grid"

    def __post_init__(self):
        if len(self.buses) < 2:
            raise SchemaError(f"grid {self.name} needs at least 2 buses, got {len(self.buses)}")
        if [bus.index for bus in self.buses] != list(range(len(self.buses))):
            raise SchemaError(f"bus indices of grid {self.name} are not dense 0..N-1")
        if len({bus.id for bus in self.buses}) != len(self.buses):
            raise SchemaError(f"grid {self.name} has duplicate bus ids")
        if not 0 <= self.slack < len(self.buses):
            raise SchemaError(f"slack index {self.slack} out of range")
        seen = set()
        for position, branch in enumerate(self.branches):
            if branch.index != position:
                raise SchemaError(f"branch indices of grid {self.name} are not dense 0..L-1")
            if branch.tail == branch.head:
                raise SchemaError(f"branch {branch.index} is a self-loop")
            if branch.susceptance <= 0:
                raise UnsupportedBranchError(f"branch {branch.index} has non-positive susceptance")
            if abs(branch.susceptance * branch.reactance - 1.0) > cfconstants.RECIPROCAL_RTOL:
                raise SchemaError(f"branch {branch.index}: reactance and susceptance are not reciprocal")
            if branch.endpoints() in seen:
                raise SchemaError(f"branch {branch.index} duplicates a node pair; merge parallel lines first")
            seen.add(branch.endpoints())

    @property
    def n_nodes(self):
        return len(self.buses)

    @property
    def n_lines(self):
        return len(self.branches)

    @property
    def n_cycles(self):
        return self.n_lines - self.n_nodes + 1

    @property
    def slack_id(self):
        return self.buses[self.slack].id

    @cached_property
    def bus_ids(self) -> np.ndarray:
        return np.array([bus.id for bus in self.buses], dtype=np.int64)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([branch.tail for branch in self.branches], dtype=np.int64)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([branch.head for branch in self.branches], dtype=np.int64)

    @cached_property
    def susceptances(self) -> np.ndarray:
        return np.array([branch.susceptance for branch in self.branches], dtype=float)

    @cached_property
    def reactances(self) -> np.ndarray:
        return np.array([branch.reactance for branch in self.branches], dtype=float)

    def index_of(self, bus_id):
        for bus in self.buses:
            if bus.id == bus_id:
                return bus.index
        raise SchemaError(f"bus {bus_id} is not part of grid {self.name}")

    def with_slack(self, slack):
        return Grid(self.buses, self.branches, slack, self.name)

    def to_graph(self) -> nx.Graph:
        """Undirected simple graph on internal bus indices; edges carry the line index."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_nodes))
        for branch in self.branches:
            graph.add_edge(branch.tail, branch.head, index=branch.index)
        return graph

    def is_tree(self):
        return self.n_lines == self.n_nodes - 1


def merge_parallel_lines(raw_branches: Sequence[Branch]) -> List[Branch]:
    """Collapses branches sharing an unordered node pair into one.

    Parallel susceptances add. The merged branch keeps the orientation of the first member
    and the result is reindexed densely in order of first appearance.
    """
    order = []
    merged = {}
    for branch in raw_branches:
        key = branch.endpoints()
        if key not in merged:
            order.append(key)
            merged[key] = [branch]
        else:
            merged[key].append(branch)

    result = []
    for index, key in enumerate(order):
        members = merged[key]
        first = members[0]
        if len(members) == 1:
            result.append(Branch.from_reactance(index, first.tail, first.head, first.reactance))
            continue
        total = sum(member.susceptance for member in members)
        logging.debug(f"Merged {len(members)} parallel lines between buses {first.tail} and {first.head}")
        result.append(Branch.from_reactance(index, first.tail, first.head, 1.0 / total))
    return result


def check_connected(buses: Sequence[Bus], branches: Sequence[Branch]):
    graph = nx.Graph()
    graph.add_nodes_from(bus.index for bus in buses)
    graph.add_edges_from((branch.tail, branch.head) for branch in branches)
    components = list(nx.connected_components(graph))
    if len(components) > 1:
        smallest = min(components, key=len)
        bus_id = min(buses[index].id for index in smallest)
        raise ConnectivityError(
            f"grid is not connected ({len(components)} components); bus {bus_id} is cut off from the rest",
            bus_id)


def build_grid(name, bus_ids: Sequence[int], raw_lines: Sequence[Tuple[int, int, float]], slack_id=None) -> Grid:
    """Normalizes raw (from_id, to_id, x) lines on the given buses into a Grid.

    Self-loops are dropped, parallel lines merged and connectivity checked. When no slack is
    given the bus with the lowest external id is used.
    """
    buses = tuple(Bus(int(bus_id), index) for index, bus_id in enumerate(bus_ids))
    lookup = {bus.id: bus.index for bus in buses}
    if len(lookup) != len(buses):
        raise SchemaError(f"grid {name} has duplicate bus ids")

    raw_branches = []
    for from_id, to_id, reactance in raw_lines:
        if from_id not in lookup or to_id not in lookup:
            raise SchemaError(f"line {from_id}-{to_id} references an unknown bus")
        if reactance <= 0:
            raise UnsupportedBranchError(f"line {from_id}-{to_id} has non-positive reactance {reactance}")
        if from_id == to_id:
            logging.warning(f"Dropping self-loop at bus {from_id}")
            continue
        raw_branches.append(Branch.from_reactance(len(raw_branches), lookup[from_id], lookup[to_id], reactance))

    branches = merge_parallel_lines(raw_branches)
    if len(branches) < len(raw_branches):
        logging.info(f"{name}: merged {len(raw_branches)} branches into {len(branches)} lines")
    check_connected(buses, branches)
    if not branches:
        raise ConnectivityError(f"grid {name} has no lines")

    if slack_id is None:
        slack_id = min(bus.id for bus in buses)
    if slack_id not in lookup:
        raise SchemaError(f"slack bus {slack_id} is not part of grid {name}")
    grid = Grid(buses, tuple(branches), lookup[slack_id], name)
    logging.info(f"Loaded {name}: N={grid.n_nodes} L={grid.n_lines} cycles={grid.n_cycles} slack={slack_id}")
    return grid


def _strip_comments(text):
    """Drops `%` comments line by line, keeping line numbers intact."""
    return "\n".join(line.split("%", 1)[0] for line in text.split("\n"))


def _find_table(text, table):
    match = re.search(r"mpc\." + table + r"\s*=\s*\[(.*?)\]\s*;?", text, re.DOTALL)
    if match is None:
        raise CaseParseError(f"no mpc.{table} table found")
    first_line = text.count("\n", 0, match.start(1)) + 1
    return match.group(1), first_line


def _parse_rows(body, first_line, table, min_columns):
    rows = []
    for offset, line in enumerate(body.split("\n")):
        line_number = first_line + offset
        line = line.split("%", 1)[0].strip()
        if not line:
            continue
        for chunk in line.split(";"):
            values = chunk.replace(",", " ").split()
            if not values:
                continue
            try:
                row = [float(value) for value in values]
            except ValueError:
                raise CaseParseError(f"non-numeric entry in mpc.{table}: {chunk.strip()!r}", line_number)
            if len(row) < min_columns:
                raise CaseParseError(
                    f"mpc.{table} row has {len(row)} columns, expected at least {min_columns}", line_number)
            rows.append((line_number, row))
    return rows


def parse_matpower_case(text: str, name: Optional[str] = None) -> Grid:
    """Builds a Grid from MATPOWER case text.

    Only bus numbers and types and branch endpoints, reactance, phase shift and status are
    read. Out-of-service branches are skipped, phase shifters are rejected.
    """
    if name is None:
        match = re.search(r"function\s+\w+\s*=\s*(\w+)", text)
        name = match.group(1) if match else "case"

    code = _strip_comments(text)
    bus_body, bus_line = _find_table(code, "bus")
    branch_body, branch_line = _find_table(code, "branch")

    bus_ids = []
    isolated = set()
    slack_id = None
    for line_number, row in _parse_rows(bus_body, bus_line, "bus", 2):
        bus_id = int(row[BUS_I])
        if bus_id != row[BUS_I]:
            raise CaseParseError(f"bus number {row[BUS_I]} is not an integer", line_number)
        if int(row[BUS_TYPE]) == ISOLATED_BUS_TYPE:
            isolated.add(bus_id)
            continue
        if int(row[BUS_TYPE]) == REF_BUS_TYPE and slack_id is None:
            slack_id = bus_id
        bus_ids.append(bus_id)

    known = set(bus_ids) | isolated
    raw_lines = []
    for line_number, row in _parse_rows(branch_body, branch_line, "branch", 4):
        from_id, to_id = int(row[F_BUS]), int(row[T_BUS])
        if from_id not in known or to_id not in known:
            raise CaseParseError(f"branch {from_id}-{to_id} references an unknown bus", line_number)
        if len(row) > BR_STATUS and row[BR_STATUS] <= 0:
            logging.debug(f"Skipping out-of-service branch {from_id}-{to_id}")
            continue
        if from_id in isolated or to_id in isolated:
            logging.warning(f"Skipping branch {from_id}-{to_id} attached to an isolated bus")
            continue
        if len(row) > SHIFT and row[SHIFT] != 0:
            raise UnsupportedBranchError(
                f"line {line_number}: branch {from_id}-{to_id} is a phase shifter ({row[SHIFT]} deg)")
        if row[BR_X] <= 0:
            raise UnsupportedBranchError(
                f"line {line_number}: branch {from_id}-{to_id} has non-positive reactance {row[BR_X]}")
        raw_lines.append((from_id, to_id, row[BR_X]))

    return build_grid(name, bus_ids, raw_lines, slack_id)


def load_native(text: str) -> Grid:
    """Builds a Grid from the native JSON format:
    {"name": str, "slack": int, "buses": [int], "branches": [{"from": int, "to": int, "x": float}]}
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"grid JSON is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise SchemaError("grid JSON must be an object")
    for key in ("name", "slack", "buses", "branches"):
        if key not in data:
            raise SchemaError(f"grid JSON is missing the '{key}' field")
    if not isinstance(data["name"], str):
        raise SchemaError("'name' must be a string")
    if not isinstance(data["buses"], list) or not all(_is_int(bus) for bus in data["buses"]):
        raise SchemaError("'buses' must be a list of integers")
    if not _is_int(data["slack"]):
        raise SchemaError("'slack' must be an integer bus id")
    if not isinstance(data["branches"], list):
        raise SchemaError("'branches' must be a list")

    raw_lines = []
    for position, entry in enumerate(data["branches"]):
        if not isinstance(entry, dict) or not {"from", "to", "x"} <= set(entry):
            raise SchemaError(f"branch #{position} must have 'from', 'to' and 'x'")
        if not _is_int(entry["from"]) or not _is_int(entry["to"]):
            raise SchemaError(f"branch #{position}: 'from' and 'to' must be integer bus ids")
        if isinstance(entry["x"], bool) or not isinstance(entry["x"], (int, float)):
            raise SchemaError(f"branch #{position}: 'x' must be a number")
        raw_lines.append((entry["from"], entry["to"], float(entry["x"])))

    return build_grid(data["name"], data["buses"], raw_lines, data["slack"])


def save_native(grid: Grid) -> str:
    data = {
        "name": grid.name,
        "slack": grid.slack_id,
        "buses": [bus.id for bus in grid.buses],
        "branches": [{"from": grid.buses[branch.tail].id,
                      "to": grid.buses[branch.head].id,
                      "x": branch.reactance} for branch in grid.branches],
    }
    return json.dumps(data, indent=2)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def is_url(source):
    return source.startswith("http://") or source.startswith("https://")


def req_session(retry_total=3, retry_backoff=1.0):
    """Session that retries transient HTTP failures when fetching case files."""
    adapter = HTTPAdapter(max_retries=Retry(
        total=retry_total,
        backoff_factor=retry_backoff,
        status_forcelist=[429, 500, 502, 503, 504],
        allowed_methods=frozenset({'GET', 'HEAD'}),
        raise_on_status=False
    ))
    session = requests.Session()
    session.mount('https://', adapter)
    session.mount('http://', adapter)
    return session


def read_case_text(source, timeout=30, retry_total=3, retry_backoff=1.0):
    if is_url(source):
        logging.info(f"Fetching case from {source}")
        response = req_session(retry_total, retry_backoff).get(source, timeout=timeout)
        if response.status_code != 200:
            raise SchemaError(f"could not fetch {source}: HTTP {response.status_code}")
        return response.text
    with open(source, "r", encoding="utf-8") as fp:
        return fp.read()


def load_case(source, timeout=30, retry_total=3, retry_backoff=1.0) -> Grid:
    """Loads a grid from a path or http(s) URL; ``.json`` (or a JSON body) selects the native format."""
    text = read_case_text(source, timeout, retry_total, retry_backoff)
    stem = os.path.splitext(os.path.basename(source.split("?")[0]))[0] or None
    if source.lower().endswith(".json") or text.lstrip().startswith("{"):
        return load_native(text)
    return parse_matpower_case(text, stem)


def write_native(grid: Grid, path):
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(save_native(grid))
