import unittest

import numpy as np

import cfconstants
from cycleflow.conventional import (SensitivityMatrix, assemble_operators, line_flows, lodf_conventional,
                                    ptdf_conventional, ptdf_prime_conventional, reduced_system)
from cycleflow.errors import GridValidationError
from cycleflow.grid_io import build_grid
from cycleflow.topology import build_topology, injection_patterns
from .TestUtils import load_fixture, path_grid, random_grids, triangle_grid


def operators(grid):
    topology = build_topology(grid)
    return topology, assemble_operators(grid, topology.incidence)


class AssembleOperatorsTest(unittest.TestCase):
    def test_two_bus(self):
        _, ops = operators(load_fixture('two_bus.m'))
        np.testing.assert_allclose(ops.B.toarray(), [[10, -10], [-10, 10]])
        np.testing.assert_allclose(ops.B_f.toarray(), [[10, -10]])
        np.testing.assert_allclose(ops.X_d.toarray(), [[0.1]])

    def test_laplacian_properties(self):
        for grid in [load_fixture('case5.m')] + list(random_grids(5, 50)):
            _, ops = operators(grid)
            B = ops.B.toarray()
            np.testing.assert_allclose(B, B.T)
            np.testing.assert_allclose(B.sum(axis=1), np.zeros(grid.n_nodes), atol=1e-9)
            eigenvalues = np.linalg.eigvalsh(B)
            self.assertGreater(eigenvalues[0], -1e-9)
            self.assertEqual(int(np.sum(np.abs(eigenvalues) < 1e-9 * eigenvalues[-1])), 1)

    def test_reduced_system_drops_slack(self):
        grid = load_fixture('case5.m')
        _, ops = operators(grid)
        keep, B_red, rhs = reduced_system(ops, grid.slack, cfconstants.MODE_DENSE)
        np.testing.assert_array_equal(keep, [0, 1, 2, 4])
        self.assertEqual(B_red.shape, (4, 4))
        self.assertEqual(rhs.shape, (4, 6))


class PtdfConventionalTest(unittest.TestCase):
    def test_tree_ptdf_is_path_matrix(self):
        grid = path_grid(6)
        topology, ops = operators(grid)
        for mode in cfconstants.MODES:
            ptdf = ptdf_conventional(ops, grid.slack, mode)
            np.testing.assert_allclose(ptdf.values, topology.tree.dense(), atol=1e-12)

    def test_slack_column_and_injection_identity(self):
        for grid in [load_fixture('case5.m'), triangle_grid()] + list(random_grids(5, 40, seed=2)):
            _, ops = operators(grid)
            ptdf = ptdf_conventional(ops, grid.slack)
            self.assertEqual(ptdf.solve_dimension, grid.n_nodes - 1)
            np.testing.assert_array_equal(ptdf.values[:, grid.slack], np.zeros(grid.n_lines))
            np.testing.assert_allclose(ops.incidence @ ptdf.values, injection_patterns(grid.n_nodes, grid.slack),
                                       atol=1e-9)

    def test_transaction_independent_of_slack(self):
        grid = load_fixture('case5.m')
        _, ops = operators(grid)
        first = ptdf_conventional(ops, 3).values
        second = ptdf_conventional(ops, 1).values
        for source, sink in [(0, 2), (4, 1), (2, 3)]:
            np.testing.assert_allclose(first[:, sink] - first[:, source], second[:, sink] - second[:, source],
                                       atol=1e-10)

    def test_uniform_reactance_scaling(self):
        grid = load_fixture('case5.m')
        scaled = build_grid('scaled', list(grid.bus_ids),
                            [(grid.buses[b.tail].id, grid.buses[b.head].id, 7.5 * b.reactance) for b in grid.branches],
                            grid.slack_id)
        _, ops = operators(grid)
        _, scaled_ops = operators(scaled)
        np.testing.assert_allclose(ptdf_conventional(ops, grid.slack).values,
                                   ptdf_conventional(scaled_ops, scaled.slack).values, atol=1e-12)

    def test_dense_sparse_and_parallel_agree(self):
        grid = next(random_grids(1, 80, seed=9))
        _, ops = operators(grid)
        sparse = ptdf_conventional(ops, grid.slack, cfconstants.MODE_SPARSE)
        dense = ptdf_conventional(ops, grid.slack, cfconstants.MODE_DENSE)
        parallel = ptdf_conventional(ops, grid.slack, cfconstants.MODE_DENSE, num_parallel=3)
        self.assertLess(sparse.max_abs_difference(dense), 1e-10)
        self.assertLess(parallel.max_abs_difference(dense), 1e-12)


class PtdfPrimeTest(unittest.TestCase):
    def test_cycle_closure_and_symmetry(self):
        for grid in [load_fixture('case5.m')] + list(random_grids(4, 40, seed=5)):
            topology, ops = operators(grid)
            prime = ptdf_prime_conventional(ops).values
            C = topology.basis.dense()
            X_d = ops.X_d.toarray()
            np.testing.assert_allclose(C.T @ X_d @ prime, np.zeros((C.shape[1], grid.n_lines)), atol=1e-9)
            weighted = X_d @ prime
            np.testing.assert_allclose(weighted, weighted.T, atol=1e-12)
            np.testing.assert_allclose(prime @ prime, prime, atol=1e-9)

    def test_columns_are_line_transactions(self):
        grid = load_fixture('case5.m')
        _, ops = operators(grid)
        ptdf = ptdf_conventional(ops, grid.slack).values
        prime = ptdf_prime_conventional(ops).values
        expected = ptdf[:, grid.heads] - ptdf[:, grid.tails]
        np.testing.assert_allclose(prime, expected, atol=1e-10)

    def test_triangle_diagonal(self):
        _, ops = operators(triangle_grid())
        prime = ptdf_prime_conventional(ops).values
        np.testing.assert_allclose(np.diag(prime), [2 / 3] * 3)


class LodfConventionalTest(unittest.TestCase):
    def test_triangle(self):
        topology, ops = operators(triangle_grid())
        lodf = lodf_conventional(ops, topology.bridges)
        np.testing.assert_allclose(np.diag(lodf.values), [-1, -1, -1])
        off_diagonal = lodf.values[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(np.abs(off_diagonal), np.ones(6))
        self.assertEqual(lodf.undefined_columns, frozenset())

    def test_bridge_column_undefined(self):
        grid = build_grid('lollipop', [1, 2, 3, 4], [(1, 2, 0.1), (2, 3, 0.2), (1, 3, 0.1), (3, 4, 0.1)])
        topology, ops = operators(grid)
        lodf = lodf_conventional(ops, topology.bridges)
        self.assertEqual(lodf.undefined_columns, frozenset({3}))
        self.assertTrue(np.all(np.isnan(lodf.values[:, 3])))
        self.assertFalse(np.any(np.isnan(lodf.values[:, :3])))
        # nothing flows into the pendant line when a loop line fails
        np.testing.assert_allclose(lodf.values[3, :3], np.zeros(3), atol=1e-12)

    def test_tree_is_all_bridges(self):
        topology, ops = operators(path_grid(4))
        lodf = lodf_conventional(ops, topology.bridges)
        self.assertEqual(lodf.undefined_columns, frozenset(range(3)))
        self.assertTrue(np.all(np.isnan(lodf.values)))


class LineFlowsTest(unittest.TestCase):
    def test_flows_match_ptdf(self):
        grid = load_fixture('case5.m')
        _, ops = operators(grid)
        injections = np.array([2.0, -1.0, 0.5, 0.0, -1.5])
        flows = line_flows(ops, injections, grid.slack)
        ptdf = ptdf_conventional(ops, grid.slack).values
        np.testing.assert_allclose(flows, -ptdf @ injections, atol=1e-10)
        np.testing.assert_allclose(ops.incidence @ flows, injections, atol=1e-10)

    def test_unbalanced_rejected(self):
        grid = load_fixture('case5.m')
        _, ops = operators(grid)
        with self.assertRaises(GridValidationError):
            line_flows(ops, [1.0, 0, 0, 0, 0], grid.slack)
        with self.assertRaises(GridValidationError):
            line_flows(ops, [1.0, -1.0], grid.slack)


class SensitivityMatrixTest(unittest.TestCase):
    def test_difference_skips_undefined_columns(self):
        first = SensitivityMatrix(np.array([[1.0, np.nan], [0.0, np.nan]]), cfconstants.LODF, 'a',
                                  undefined_columns=frozenset({1}))
        second = SensitivityMatrix(np.array([[1.5, 3.0], [0.0, 4.0]]), cfconstants.LODF, 'b')
        np.testing.assert_array_equal(first.defined_mask(), [True, False])
        self.assertAlmostEqual(first.max_abs_difference(second), 0.5)

    def test_shape_mismatch(self):
        first = SensitivityMatrix(np.zeros((2, 2)), cfconstants.PTDF, 'a')
        with self.assertRaises(ValueError):
            first.max_abs_difference(SensitivityMatrix(np.zeros((2, 3)), cfconstants.PTDF, 'b'))


if __name__ == '__main__':
    unittest.main()
