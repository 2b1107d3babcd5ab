"""Symmetric positive definite solvers with many right-hand sides.

Both PTDF routes reduce to "factor K once, solve K X = R for a block of columns". The
dense path uses a LAPACK Cholesky factorization, the sparse path CHOLMOD when
scikit-sparse is installed and SuperLU otherwise. A factorized solver is never mutated
by ``solve``, so one instance may serve several threads.
"""
import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg
import scipy.sparse as sps
import scipy.sparse.linalg

import cfconstants
from threading_utils import propagate_exceptions
from .errors import IllConditionedGridError

try:  # CHOLMOD through scikit-sparse, optional
    from sksparse import cholmod
    _has_cholmod = True
except ImportError:
    _has_cholmod = False


class LinearSolver(ABC):
    """Solves K X = R for a symmetric positive definite K.

    ``dimension`` and ``nnz`` describe the last factorized matrix and ``columns_solved``
    counts right-hand sides, so callers can report how large a system each method solved.
    """

    def __init__(self):
        self.dimension = 0
        self.nnz = 0
        self.columns_solved = 0

    def factorize(self, K):
        self.dimension = K.shape[0]
        self.nnz = K.nnz if sps.issparse(K) else int(np.count_nonzero(K))
        if self.dimension:
            self._factorize(K)
        return self

    def solve(self, rhs, num_parallel=1):
        rhs = rhs.toarray() if sps.issparse(rhs) else np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.dimension:
            raise ValueError(f"right-hand side has {rhs.shape[0]} rows, system has {self.dimension}")
        n_rhs = rhs.shape[1] if rhs.ndim == 2 else 1
        self.columns_solved += n_rhs
        if self.dimension == 0:
            return np.zeros(rhs.shape)
        if num_parallel <= 1 or rhs.ndim == 1 or n_rhs < 2 * num_parallel:
            return self._solve(rhs)

        blocks = np.array_split(np.arange(n_rhs), num_parallel)
        result = np.empty(rhs.shape)
        with ThreadPoolExecutor(max_workers=num_parallel) as executor:
            futures = [executor.submit(self._solve_block, rhs, block, result) for block in blocks]
        propagate_exceptions(futures)
        return result

    def _solve_block(self, rhs, block, result):
        result[:, block] = self._solve(np.ascontiguousarray(rhs[:, block]))

    @abstractmethod
    def _factorize(self, K):
        pass

    @abstractmethod
    def _solve(self, rhs):
        pass


class DenseCholeskySolver(LinearSolver):
    def _factorize(self, K):
        K = K.toarray() if sps.issparse(K) else np.asarray(K, dtype=float)
        try:
            self._factor = scipy.linalg.cho_factor(K, lower=True, check_finite=False)
        except np.linalg.LinAlgError as e:
            raise IllConditionedGridError(f"matrix of dimension {self.dimension} is not positive definite: {e}")

    def _solve(self, rhs):
        return scipy.linalg.cho_solve(self._factor, rhs, check_finite=False)


class SparseLUSolver(LinearSolver):
    """SuperLU fallback; symmetric ordering keeps the factors close to a Cholesky factor."""

    def _factorize(self, K):
        K = sps.csc_matrix(K, dtype=float)
        try:
            self._factor = scipy.sparse.linalg.splu(K, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as e:
            raise IllConditionedGridError(f"sparse matrix of dimension {self.dimension} is singular: {e}")

    def _solve(self, rhs):
        return self._factor.solve(rhs)


class SparseCholeskySolver(LinearSolver):
    def __init__(self):
        super().__init__()
        if not _has_cholmod:
            raise ImportError("scikit-sparse is not installed on this system")

    def _factorize(self, K):
        try:
            self._factor = cholmod.cholesky(sps.csc_matrix(K, dtype=float))
        except cholmod.CholmodNotPositiveDefiniteError as e:
            raise IllConditionedGridError(f"sparse matrix of dimension {self.dimension} is not positive definite: {e}")

    def _solve(self, rhs):
        return self._factor(rhs)


def get_solver(mode) -> LinearSolver:
    if mode == cfconstants.MODE_DENSE:
        return DenseCholeskySolver()
    if mode != cfconstants.MODE_SPARSE:
        raise ValueError(f"unknown mode {mode}; choose from {cfconstants.MODES}")
    if _has_cholmod:
        return SparseCholeskySolver()
    logging.debug("scikit-sparse not available, using SuperLU for the sparse path")
    return SparseLUSolver()
