"""Cycle-flow (dual) computation of distribution factors.

Any flow pattern carrying a transaction is a tree path plus a combination of basis cycle
flows. The physical one closes every basis cycle, C^t X_d F = 0, which leaves an
(L-N+1)-dimensional system M f = -dP C^t X_d T[:, r] with M = C^t X_d C. M is factored
once per grid and reused for every right-hand side.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sps

import cfconstants
from .conventional import SensitivityMatrix, lodf_from_ptdf_prime
from .errors import SolverError
from .grid_io import Grid
from .solvers import LinearSolver, get_solver
from .topology import CycleBasis, SpanningTreePaths


@dataclass(frozen=True, eq=False)
class CycleOperator:
    """M = C^t X_d C together with its factorization and the projection C^t X_d."""
    M: object
    Xf: sps.csc_matrix
    C: sps.csc_matrix
    solver: LinearSolver

    @property
    def dimension(self):
        return self.M.shape[0]

    def solve(self, rhs, num_parallel=1):
        return self.solver.solve(rhs, num_parallel)


@dataclass(frozen=True, eq=False)
class FlowDecomposition:
    """Transaction flows split into a direct tree path and cycle flows (MW)."""
    source: int
    sink: int
    power: float
    direct: np.ndarray
    cycle_strengths: np.ndarray
    total: np.ndarray


def build_cycle_operator(grid: Grid, basis: CycleBasis, mode=cfconstants.MODE_SPARSE) -> CycleOperator:
    C = sps.csc_matrix(basis.matrix, dtype=float)
    Xf = sps.csc_matrix(C.T @ sps.diags(grid.reactances, format="csc"))
    M = sps.csc_matrix(Xf @ C)
    if mode == cfconstants.MODE_DENSE:
        M = M.toarray()
    solver = get_solver(mode).factorize(M)
    return CycleOperator(M, Xf, C, solver)


def _operator(grid, basis, mode, operator):
    return operator if operator is not None else build_cycle_operator(grid, basis, mode)


def transaction_path(tree: SpanningTreePaths, source, sink) -> np.ndarray:
    """Unit flow from source to sink along the tree; via the root when neither is the root."""
    return (tree.path(sink) - tree.path(source)).astype(float)


def cycle_flows(grid: Grid, basis: CycleBasis, tree: SpanningTreePaths, source, sink, power,
                mode=cfconstants.MODE_SPARSE, operator=None) -> FlowDecomposition:
    """Decomposes the flows of a ``power`` MW transaction from source to sink.

    A positive cycle strength circulates in the stored orientation of its basis column.
    """
    if source == sink:
        zeros = np.zeros(grid.n_lines)
        return FlowDecomposition(source, sink, power, zeros, np.zeros(basis.n_cycles), zeros.copy())

    direct = power * transaction_path(tree, source, sink)
    if basis.n_cycles == 0:
        return FlowDecomposition(source, sink, power, direct, np.zeros(0), direct.copy())

    operator = _operator(grid, basis, mode, operator)
    strengths = operator.solve(-(operator.Xf @ direct))
    total = direct + operator.C @ strengths
    return FlowDecomposition(source, sink, power, direct, np.asarray(strengths), np.asarray(total))


def ptdf_dual(grid: Grid, basis: CycleBasis, tree: SpanningTreePaths, mode=cfconstants.MODE_SPARSE,
              num_parallel=1, operator=None) -> SensitivityMatrix:
    """PTDF = T - C TEMP with (C^t X_d C) TEMP = C^t X_d T; no inverse is formed."""
    T = tree.dense().astype(float)
    if basis.n_cycles == 0:
        return SensitivityMatrix(T, cfconstants.PTDF, cfconstants.METHOD_DUAL, tree.slack)

    operator = _operator(grid, basis, mode, operator)
    rhs = operator.Xf @ tree.matrix
    temp = operator.solve(rhs, num_parallel)
    values = T - operator.C @ temp
    logging.debug(f"Dual PTDF: solved dimension {operator.dimension} with {grid.n_nodes} right-hand sides")
    return SensitivityMatrix(np.asarray(values), cfconstants.PTDF, cfconstants.METHOD_DUAL, tree.slack,
                             solve_dimension=operator.dimension)


def ptdf_prime_dual(grid: Grid, basis: CycleBasis, mode=cfconstants.MODE_SPARSE, num_parallel=1,
                    operator=None) -> SensitivityMatrix:
    """PTDF' = 1 - C (C^t X_d C)^-1 C^t X_d, by the same two-step solve with C^t X_d as right-hand side."""
    identity = np.eye(grid.n_lines)
    if basis.n_cycles == 0:
        return SensitivityMatrix(identity, cfconstants.PTDF_PRIME, cfconstants.METHOD_DUAL)

    operator = _operator(grid, basis, mode, operator)
    temp = operator.solve(operator.Xf, num_parallel)
    values = identity - operator.C @ temp
    return SensitivityMatrix(np.asarray(values), cfconstants.PTDF_PRIME, cfconstants.METHOD_DUAL,
                             solve_dimension=operator.dimension)


def ptdf_prime_qr(grid: Grid, basis: CycleBasis) -> SensitivityMatrix:
    """PTDF' = 1 - sqrt(B_d) Q Q^t sqrt(X_d) with Q from the thin QR of sqrt(X_d) C.

    Q Q^t is the orthogonal projector onto the weighted cycle space, so no system is solved.
    """
    identity = np.eye(grid.n_lines)
    if basis.n_cycles == 0:
        return SensitivityMatrix(identity, cfconstants.PTDF_PRIME, cfconstants.METHOD_QR)

    sqrt_x = np.sqrt(grid.reactances)
    sqrt_b = np.sqrt(grid.susceptances)
    weighted = sqrt_x[:, None] * basis.dense().astype(float)
    Q, R = scipy.linalg.qr(weighted, mode="economic")
    pivots = np.abs(np.diag(R))
    if pivots.min() <= cfconstants.QR_RANK_TOL * max(1.0, pivots.max()):
        raise SolverError(f"cycle basis of {grid.name} is rank deficient")

    values = identity - (sqrt_b[:, None] * Q) @ (Q.T * sqrt_x[None, :])
    return SensitivityMatrix(values, cfconstants.PTDF_PRIME, cfconstants.METHOD_QR)


def ptdf_qr(grid: Grid, basis: CycleBasis, tree: SpanningTreePaths) -> SensitivityMatrix:
    """PTDF = PTDF' T: the transaction along the tree path, projected onto physical flows."""
    prime = ptdf_prime_qr(grid, basis)
    values = prime.values @ tree.dense().astype(float)
    return SensitivityMatrix(values, cfconstants.PTDF, cfconstants.METHOD_QR, tree.slack)


def lodf_dual(grid: Grid, basis: CycleBasis, bridges, mode=cfconstants.MODE_SPARSE, num_parallel=1,
              operator=None) -> SensitivityMatrix:
    return lodf_from_ptdf_prime(ptdf_prime_dual(grid, basis, mode, num_parallel, operator), bridges)


def lodf_qr(grid: Grid, basis: CycleBasis, bridges) -> SensitivityMatrix:
    return lodf_from_ptdf_prime(ptdf_prime_qr(grid, basis), bridges)
