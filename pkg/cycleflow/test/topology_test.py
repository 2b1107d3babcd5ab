import unittest

import numpy as np

from cycleflow.errors import TopologyError
from cycleflow.grid_io import build_grid
from cycleflow.topology import (TRAVERSAL_DFS, CycleBasis, SpanningTreePaths, Topology, build_cycle_basis,
                                build_incidence, build_spanning_tree, build_topology, check_identities,
                                cycle_space_equal, find_bridges, injection_patterns)
from .TestUtils import REFERENCE_CYCLE_BASIS, load_fixture, path_grid, random_grids, triangle_grid


class IncidenceTest(unittest.TestCase):
    def test_case5_incidence(self):
        grid = load_fixture('case5.m')
        incidence = build_incidence(grid).dense()
        self.assertEqual(incidence.shape, (5, 6))
        np.testing.assert_array_equal(incidence.sum(axis=0), np.zeros(6))
        np.testing.assert_array_equal(np.abs(incidence).sum(axis=0), 2 * np.ones(6))
        # line 2-3 leaves bus 2 and enters bus 3
        self.assertEqual(incidence[1, 3], 1)
        self.assertEqual(incidence[2, 3], -1)

    def test_injection_patterns(self):
        expected = np.array([
            [-1, 0, 0],
            [1, 0, 1],
            [0, 0, -1],
        ])
        np.testing.assert_array_equal(injection_patterns(3, 1), expected)


class SpanningTreeTest(unittest.TestCase):
    def test_paths_from_slack(self):
        grid = load_fixture('case5.m')
        tree = build_spanning_tree(grid)
        self.assertEqual(tree.slack, 3)
        self.assertEqual(len(tree.tree_edges), 4)
        np.testing.assert_array_equal(tree.path(3), np.zeros(6))
        # bus 1 is reached from bus 4 directly, against the 1 -> 4 orientation
        np.testing.assert_array_equal(tree.path(0), [0, -1, 0, 0, 0, 0])

    def test_transport_identity(self):
        for grid in [load_fixture('case5.m'), triangle_grid(), path_grid(6)] + list(random_grids(5, 40)):
            for slack in {0, grid.n_nodes - 1, grid.slack}:
                incidence = build_incidence(grid).matrix
                tree = build_spanning_tree(grid, slack)
                np.testing.assert_array_equal((incidence @ tree.matrix).toarray(),
                                              injection_patterns(grid.n_nodes, slack))

    def test_depth_first_tree(self):
        grid = path_grid(4)
        dfs = build_spanning_tree(grid, 0, TRAVERSAL_DFS)
        np.testing.assert_array_equal(dfs.dense(), build_spanning_tree(grid, 0).dense())

        differs = 0
        for grid in random_grids(10, 60, seed=9):
            dfs_topology = build_topology(grid, traversal=TRAVERSAL_DFS)
            check_identities(grid, dfs_topology)
            self.assertTrue(cycle_space_equal(dfs_topology.basis, build_topology(grid).basis))
            differs += dfs_topology.tree.tree_edges != build_spanning_tree(grid).tree_edges
        self.assertGreater(differs, 0)

    def test_unknown_traversal(self):
        with self.assertRaises(TopologyError):
            build_spanning_tree(triangle_grid(), traversal='random')


class CycleBasisTest(unittest.TestCase):
    def test_case5_basis(self):
        grid = load_fixture('case5.m')
        tree = build_spanning_tree(grid)
        basis = build_cycle_basis(grid, tree)
        self.assertEqual(basis.n_cycles, 2)
        self.assertEqual(len(basis.chords), 2)
        self.assertTrue(set(basis.chords).isdisjoint(tree.tree_edges))
        incidence = build_incidence(grid).dense()
        np.testing.assert_array_equal(incidence @ basis.dense(), np.zeros((5, 2)))
        for column, chord in enumerate(basis.chords):
            self.assertEqual(basis.dense()[chord, column], 1)

    def test_hand_picked_basis_spans_same_space(self):
        grid = load_fixture('case5.m')
        built = build_topology(grid).basis
        picked = CycleBasis.from_dense(REFERENCE_CYCLE_BASIS)
        incidence = build_incidence(grid).dense()
        np.testing.assert_array_equal(incidence @ REFERENCE_CYCLE_BASIS, np.zeros((5, 2)))
        self.assertTrue(cycle_space_equal(built, picked))

        flipped = REFERENCE_CYCLE_BASIS.copy()
        flipped[:, 1] *= -1
        self.assertTrue(cycle_space_equal(built, CycleBasis.from_dense(flipped)))

        combined = np.column_stack([REFERENCE_CYCLE_BASIS[:, 0] + REFERENCE_CYCLE_BASIS[:, 1], REFERENCE_CYCLE_BASIS[:, 1]])
        self.assertTrue(cycle_space_equal(built, CycleBasis.from_dense(combined)))

    def test_shared_edge_cancels(self):
        # two squares 1-2-3-4 and 2-5-6-3 sharing line 2-3, both faces walked the same way round
        grid = build_grid('two_faces', [1, 2, 3, 4, 5, 6],
                          [(1, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1), (4, 1, 0.1), (2, 5, 0.1), (5, 6, 0.1), (6, 3, 0.1)])
        faces = np.array([
            [1, 0],
            [1, -1],
            [1, 0],
            [1, 0],
            [0, 1],
            [0, 1],
            [0, 1],
        ])
        incidence = build_incidence(grid).dense()
        np.testing.assert_array_equal(incidence @ faces, np.zeros((6, 2)))
        self.assertTrue(cycle_space_equal(build_topology(grid).basis, CycleBasis.from_dense(faces)))

        outer = faces[:, 0] + faces[:, 1]
        np.testing.assert_array_equal(np.flatnonzero(outer == 0), [1])
        np.testing.assert_array_equal(incidence @ outer, np.zeros(6))

    def test_non_cycle_column_changes_space(self):
        grid = load_fixture('case5.m')
        built = build_topology(grid).basis
        broken = REFERENCE_CYCLE_BASIS.copy()
        broken[:, 1] = [1, 0, 0, 0, 0, 0]
        self.assertFalse(cycle_space_equal(built, CycleBasis.from_dense(broken)))

    def test_mismatched_line_sets(self):
        with self.assertRaises(TopologyError):
            cycle_space_equal(CycleBasis.from_dense(np.ones((3, 1))), CycleBasis.from_dense(np.ones((4, 1))))

    def test_from_dense_needs_matrix(self):
        with self.assertRaises(TopologyError):
            CycleBasis.from_dense([1, -1, 1])

    def test_tree_has_empty_basis(self):
        grid = path_grid(5)
        topology = build_topology(grid)
        self.assertEqual(topology.basis.n_cycles, 0)
        self.assertEqual(topology.basis.dense().shape, (4, 0))
        self.assertEqual(topology.bridges, frozenset(range(4)))
        check_identities(grid, topology)

    def test_cycle_count_on_random_grids(self):
        for grid in random_grids(10, 60, seed=4):
            topology = build_topology(grid)
            self.assertEqual(topology.basis.n_cycles, grid.n_lines - grid.n_nodes + 1)
            check_identities(grid, topology)


class BridgeTest(unittest.TestCase):
    def test_pendant_line_is_bridge(self):
        grid = build_grid('lollipop', [1, 2, 3, 4], [(1, 2, 0.1), (2, 3, 0.1), (1, 3, 0.1), (3, 4, 0.1)])
        self.assertEqual(find_bridges(grid), frozenset({3}))

    def test_meshed_grid_has_no_bridges(self):
        self.assertEqual(find_bridges(triangle_grid()), frozenset())


class IdentityCheckTest(unittest.TestCase):
    def test_wrong_basis_detected(self):
        grid = load_fixture('case5.m')
        topology = build_topology(grid)
        broken = REFERENCE_CYCLE_BASIS.copy()
        broken[:, 0] = [1, 0, 0, 0, 0, 0]
        bad = Topology(topology.incidence, topology.tree, CycleBasis.from_dense(broken), topology.bridges)
        with self.assertRaises(TopologyError):
            check_identities(grid, bad)

    def test_wrong_tree_detected(self):
        grid = load_fixture('case5.m')
        topology = build_topology(grid)
        reversed_tree = SpanningTreePaths(-topology.tree.matrix, topology.tree.tree_edges, topology.tree.slack)
        with self.assertRaises(TopologyError):
            check_identities(grid, Topology(topology.incidence, reversed_tree, topology.basis, topology.bridges))

    def test_other_root_passes(self):
        grid = load_fixture('case5.m')
        topology = build_topology(grid, 0)
        self.assertEqual(topology.tree.slack, 0)
        check_identities(grid, topology)


if __name__ == '__main__':
    unittest.main()
