import unittest

import numpy as np
import scipy.sparse as sps

import cfconstants
from cycleflow.errors import IllConditionedGridError
from cycleflow.solvers import DenseCholeskySolver, SparseLUSolver, get_solver


def spd_matrix(n, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


class SolverTest(unittest.TestCase):
    def test_dense_and_sparse_agree(self):
        K = spd_matrix(12)
        rhs = np.random.default_rng(1).normal(size=(12, 7))
        dense = DenseCholeskySolver().factorize(K).solve(rhs)
        sparse = SparseLUSolver().factorize(sps.csc_matrix(K)).solve(rhs)
        np.testing.assert_allclose(K @ dense, rhs, atol=1e-10)
        np.testing.assert_allclose(sparse, dense, atol=1e-10)

    def test_statistics(self):
        solver = DenseCholeskySolver().factorize(np.diag([1.0, 2.0, 4.0]))
        solver.solve(np.ones((3, 5)))
        solver.solve(np.ones(3))
        self.assertEqual((solver.dimension, solver.nnz, solver.columns_solved), (3, 3, 6))

    def test_parallel_blocks(self):
        K = spd_matrix(20, seed=3)
        rhs = np.random.default_rng(4).normal(size=(20, 31))
        for mode in cfconstants.MODES:
            serial = get_solver(mode).factorize(sps.csc_matrix(K)).solve(rhs)
            parallel = get_solver(mode).factorize(sps.csc_matrix(K)).solve(rhs, num_parallel=4)
            np.testing.assert_allclose(parallel, serial, atol=1e-12)

    def test_empty_system(self):
        solver = DenseCholeskySolver().factorize(np.zeros((0, 0)))
        self.assertEqual(solver.solve(np.zeros((0, 4))).shape, (0, 4))

    def test_rhs_dimension_checked(self):
        solver = DenseCholeskySolver().factorize(np.eye(3))
        with self.assertRaises(ValueError):
            solver.solve(np.ones((4, 1)))

    def test_not_positive_definite(self):
        with self.assertRaises(IllConditionedGridError):
            DenseCholeskySolver().factorize(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_singular_sparse(self):
        with self.assertRaises(IllConditionedGridError):
            SparseLUSolver().factorize(sps.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]])))

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            get_solver('gpu')


if __name__ == '__main__':
    unittest.main()
