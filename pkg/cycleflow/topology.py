"""Graph algebra of a grid: incidence matrix, slack-rooted spanning tree paths and the
fundamental cycle basis built from the tree's chords.

All matrices are integer valued and kept in compressed sparse column form; ``dense()``
converts on demand.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Optional

import networkx as nx
import numpy as np
import scipy.sparse as sps

from .errors import TopologyError
from .grid_io import Grid

TRAVERSAL_BFS = "bfs"
TRAVERSAL_DFS = "dfs"
TREE_TRAVERSALS = {TRAVERSAL_BFS: nx.bfs_edges, TRAVERSAL_DFS: nx.dfs_edges}


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """N x L node-edge incidence matrix: +1 at the tail of each line, -1 at its head."""
    matrix: sps.csc_matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True, eq=False)
class SpanningTreePaths:
    """L x N path matrix; column r holds the oriented tree path slack -> r."""
    matrix: sps.csc_matrix
    tree_edges: FrozenSet[int]
    slack: int

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def path(self, r) -> np.ndarray:
        return self.matrix[:, [r]].toarray().ravel()


@dataclass(frozen=True, eq=False)
class CycleBasis:
    """L x (L-N+1) cycle-edge incidence matrix, one column per chord."""
    matrix: sps.csc_matrix
    chords: List[int]

    @classmethod
    def from_dense(cls, columns, chords=None):
        """Wraps a literal basis, e.g. a hand-picked one. ``columns`` is L x k."""
        columns = np.asarray(columns, dtype=np.int64)
        if columns.ndim != 2:
            raise TopologyError("a cycle basis must be a 2-d matrix")
        return cls(sps.csc_matrix(columns), list(chords) if chords is not None else [])

    @property
    def n_cycles(self):
        return self.matrix.shape[1]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True, eq=False)
class Topology:
    """Everything that depends only on the grid's wiring, reusable across susceptance changes."""
    incidence: IncidenceMatrix
    tree: SpanningTreePaths
    basis: CycleBasis
    bridges: FrozenSet[int]


def build_incidence(grid: Grid) -> IncidenceMatrix:
    lines = np.arange(grid.n_lines)
    rows = np.concatenate([grid.tails, grid.heads])
    cols = np.concatenate([lines, lines])
    data = np.concatenate([np.ones(grid.n_lines, dtype=np.int64), -np.ones(grid.n_lines, dtype=np.int64)])
    matrix = sps.csc_matrix((data, (rows, cols)), shape=(grid.n_nodes, grid.n_lines), dtype=np.int64)
    return IncidenceMatrix(matrix)


def build_spanning_tree(grid: Grid, slack: Optional[int] = None, traversal=TRAVERSAL_BFS) -> SpanningTreePaths:
    """Spanning tree rooted at the slack (or the given node), breadth-first unless ``traversal`` says dfs.

    Every spanning tree yields the same sensitivities.
    """
    if traversal not in TREE_TRAVERSALS:
        raise TopologyError(f"unknown tree traversal {traversal!r}, expected one of {sorted(TREE_TRAVERSALS)}")
    root = grid.slack if slack is None else slack
    graph = grid.to_graph()
    tails = grid.tails

    paths = {root: []}
    tree_edges = set()
    for parent, child in TREE_TRAVERSALS[traversal](graph, root):
        line = graph[parent][child]["index"]
        sign = 1 if tails[line] == parent else -1
        paths[child] = paths[parent] + [(line, sign)]
        tree_edges.add(line)

    if len(paths) != grid.n_nodes:
        raise TopologyError(f"grid {grid.name} is not connected; tree reaches {len(paths)} of {grid.n_nodes} buses")

    rows, cols, data = [], [], []
    for node, path in paths.items():
        for line, sign in path:
            rows.append(line)
            cols.append(node)
            data.append(sign)
    matrix = sps.csc_matrix((np.array(data, dtype=np.int64), (rows, cols)),
                            shape=(grid.n_lines, grid.n_nodes), dtype=np.int64)
    return SpanningTreePaths(matrix, frozenset(tree_edges), root)


def build_cycle_basis(grid: Grid, tree: SpanningTreePaths) -> CycleBasis:
    """Fundamental basis: each chord (t -> h) closed by the tree path h -> t.

    The column equals e_chord + T[:, t] - T[:, h]; the shared part of both tree paths
    cancels, leaving the chord with coefficient +1.
    """
    chords = [line for line in range(grid.n_lines) if line not in tree.tree_edges]
    if len(chords) != grid.n_cycles:
        raise TopologyError(f"expected {grid.n_cycles} chords, found {len(chords)}")
    if not chords:
        return CycleBasis(sps.csc_matrix((grid.n_lines, 0), dtype=np.int64), [])

    chord_index = np.array(chords, dtype=np.int64)
    selection = sps.csc_matrix((np.ones(len(chords), dtype=np.int64), (chord_index, np.arange(len(chords)))),
                               shape=(grid.n_lines, len(chords)), dtype=np.int64)
    paths = tree.matrix[:, grid.tails[chord_index]] - tree.matrix[:, grid.heads[chord_index]]
    matrix = sps.csc_matrix(selection + paths, dtype=np.int64)
    matrix.eliminate_zeros()
    return CycleBasis(matrix, chords)


def find_bridges(grid: Grid) -> FrozenSet[int]:
    """Lines whose removal disconnects the grid."""
    graph = grid.to_graph()
    return frozenset(graph[u][v]["index"] for u, v in nx.bridges(graph))


def build_topology(grid: Grid, slack: Optional[int] = None, traversal=TRAVERSAL_BFS) -> Topology:
    incidence = build_incidence(grid)
    tree = build_spanning_tree(grid, slack, traversal)
    basis = build_cycle_basis(grid, tree)
    bridges = find_bridges(grid)
    logging.debug(f"{grid.name}: {len(tree.tree_edges)} tree edges, {basis.n_cycles} cycles, "
                  f"{len(bridges)} bridges")
    return Topology(incidence, tree, basis, bridges)


def cycle_space_equal(first: CycleBasis, second: CycleBasis) -> bool:
    """True iff both bases span the same subspace of the edge space."""
    a = first.dense().astype(float)
    b = second.dense().astype(float)
    if a.shape[0] != b.shape[0]:
        raise TopologyError(f"cycle bases live on different line sets ({a.shape[0]} vs {b.shape[0]} lines)")
    rank_a = np.linalg.matrix_rank(a) if a.size else 0
    rank_b = np.linalg.matrix_rank(b) if b.size else 0
    joint = np.hstack([a, b])
    rank_joint = np.linalg.matrix_rank(joint) if joint.size else 0
    return rank_a == rank_b == rank_joint


def check_identities(grid: Grid, topology: Topology):
    """Raises TopologyError if any of the integer identities tying I, T and C together fails."""
    incidence = topology.incidence.matrix
    if np.any(np.asarray(incidence.sum(axis=0)) != 0):
        raise TopologyError("incidence columns do not sum to zero")

    closure = incidence @ topology.basis.matrix
    if closure.nnz and np.any(closure.data != 0):
        raise TopologyError("I * C is not zero")
    if topology.basis.n_cycles != grid.n_cycles:
        raise TopologyError(f"basis has {topology.basis.n_cycles} cycles, expected {grid.n_cycles}")

    transport = (incidence @ topology.tree.matrix).toarray()
    expected = injection_patterns(grid.n_nodes, topology.tree.slack)
    if not np.array_equal(transport, expected):
        raise TopologyError("I * T does not reproduce the slack injection patterns")


def injection_patterns(n_nodes, slack) -> np.ndarray:
    """Matrix S: column r is +1 at the slack and -1 at r; the slack column is zero."""
    patterns = -np.eye(n_nodes, dtype=np.int64)
    patterns[slack, :] = 1
    patterns[slack, slack] = 0
    return patterns
