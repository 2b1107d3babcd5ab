"""Node-based distribution factors: assemble B = I B_d I^t, ground it at a slack bus and
solve the reduced (N-1)-dimensional system.
"""
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

import numpy as np
import scipy.sparse as sps

import cfconstants
from .errors import GridValidationError
from .grid_io import Grid
from .solvers import get_solver
from .topology import IncidenceMatrix


@dataclass(frozen=True, eq=False)
class SusceptanceOperators:
    B_d: sps.csc_matrix
    X_d: sps.csc_matrix
    B: sps.csc_matrix
    B_f: sps.csc_matrix
    incidence: sps.csc_matrix

    @property
    def n_nodes(self):
        return self.B.shape[0]

    @property
    def n_lines(self):
        return self.B_d.shape[0]


@dataclass(frozen=True, eq=False)
class SensitivityMatrix:
    """Distribution factors; rows are lines, columns are buses (PTDF) or lines (PTDF', LODF).

    PTDF column r holds the line flows of a unit transaction from the slack to bus r.
    LODF columns listed in ``undefined_columns`` belong to bridges and hold NaN.
    """
    values: np.ndarray
    kind: str
    method: str
    slack: Optional[int] = None
    undefined_columns: FrozenSet[int] = field(default_factory=frozenset)
    solve_dimension: int = 0

    @property
    def shape(self):
        return self.values.shape

    def defined_mask(self) -> np.ndarray:
        mask = np.ones(self.values.shape[1], dtype=bool)
        mask[list(self.undefined_columns)] = False
        return mask

    def max_abs_difference(self, other: "SensitivityMatrix") -> float:
        """Largest entry deviation over the columns defined in both matrices."""
        if self.values.shape != other.values.shape:
            raise ValueError(f"cannot compare {self.values.shape} with {other.values.shape}")
        mask = self.defined_mask() & other.defined_mask()
        if not mask.any() or self.values.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(self.values[:, mask] - other.values[:, mask])))


def _diagonal(values) -> sps.csc_matrix:
    return sps.diags(values, format="csc")


def assemble_operators(grid: Grid, incidence: IncidenceMatrix) -> SusceptanceOperators:
    I = sps.csc_matrix(incidence.matrix, dtype=float)
    B_d = _diagonal(grid.susceptances)
    X_d = _diagonal(grid.reactances)
    B_f = sps.csc_matrix(B_d @ I.T)
    B = sps.csc_matrix(I @ B_f)
    return SusceptanceOperators(B_d, X_d, B, B_f, I)


def _non_slack(n_nodes, slack):
    return np.array([node for node in range(n_nodes) if node != slack], dtype=np.int64)


def _reduced(ops: SusceptanceOperators, slack, mode):
    keep = _non_slack(ops.n_nodes, slack)
    B_red = ops.B[keep, :][:, keep]
    if mode == cfconstants.MODE_DENSE:
        B_red = B_red.toarray()
    return keep, B_red


def reduced_system(ops: SusceptanceOperators, slack, mode=cfconstants.MODE_SPARSE):
    """(keep, B_red, B_f,red^t): the slack-grounded system solved for the PTDF."""
    keep, B_red = _reduced(ops, slack, mode)
    return keep, B_red, ops.B_f[:, keep].T.toarray()


def ptdf_conventional(ops: SusceptanceOperators, slack, mode=cfconstants.MODE_SPARSE, num_parallel=1,
                      solver=None) -> SensitivityMatrix:
    """PTDF with a fixed slack from PTDF_red B_red = B_f,red.

    B_red is symmetric, so the transposed system B_red Y = B_f,red^t is solved instead. The
    grounded solution describes injection at r against the slack; the transaction slack -> r
    is its negative.
    """
    solver = solver or get_solver(mode)
    keep, B_red, rhs = reduced_system(ops, slack, mode)
    Y = solver.factorize(B_red).solve(rhs, num_parallel)

    values = np.zeros((ops.n_lines, ops.n_nodes))
    values[:, keep] = -Y.T
    logging.debug(f"Conventional PTDF: solved dimension {solver.dimension} with {rhs.shape[1]} right-hand sides")
    return SensitivityMatrix(values, cfconstants.PTDF, cfconstants.METHOD_CONVENTIONAL, slack,
                             solve_dimension=solver.dimension)


def ptdf_prime_conventional(ops: SusceptanceOperators, mode=cfconstants.MODE_SPARSE, num_parallel=1,
                            solver=None) -> SensitivityMatrix:
    """PTDF' = B_d I^t B^+ I, grounded at bus 0; every column of I is a balanced injection."""
    solver = solver or get_solver(mode)
    keep, B_red = _reduced(ops, 0, mode)
    rhs = ops.incidence[keep, :].toarray()
    theta = solver.factorize(B_red).solve(rhs, num_parallel)
    values = ops.B_f[:, keep] @ theta
    return SensitivityMatrix(np.asarray(values), cfconstants.PTDF_PRIME, cfconstants.METHOD_CONVENTIONAL,
                             solve_dimension=solver.dimension)


def lodf_from_ptdf_prime(ptdf_prime: SensitivityMatrix, bridges: FrozenSet[int]) -> SensitivityMatrix:
    """LODF column l = PTDF'[:, l] / (1 - PTDF'[l, l]); the diagonal is -1.

    Bridge columns are left undefined (NaN) instead of dividing by a vanishing number.
    """
    p = ptdf_prime.values
    n_lines = p.shape[0]
    own = np.diag(p)
    for line in range(n_lines):
        looks_like_bridge = abs(1.0 - own[line]) < cfconstants.BRIDGE_WARNING_TOL
        if looks_like_bridge != (line in bridges):
            logging.warning(f"Line {line}: graph bridge test says {line in bridges} but PTDF' diagonal is {own[line]}")

    values = np.full((n_lines, n_lines), np.nan)
    defined = np.array([line not in bridges for line in range(n_lines)], dtype=bool)
    if defined.any():
        values[:, defined] = p[:, defined] / (1.0 - own[defined])
        index = np.flatnonzero(defined)
        values[index, index] = -1.0
    return SensitivityMatrix(values, cfconstants.LODF, ptdf_prime.method,
                             undefined_columns=frozenset(bridges), solve_dimension=ptdf_prime.solve_dimension)


def lodf_conventional(ops: SusceptanceOperators, bridges, mode=cfconstants.MODE_SPARSE,
                      num_parallel=1) -> SensitivityMatrix:
    return lodf_from_ptdf_prime(ptdf_prime_conventional(ops, mode, num_parallel), bridges)


def line_flows(ops: SusceptanceOperators, injections, slack, mode=cfconstants.MODE_SPARSE) -> np.ndarray:
    """Line flows F = B_d I^t theta for a balanced injection vector (angle 0 at the slack)."""
    injections = np.asarray(injections, dtype=float)
    if injections.shape != (ops.n_nodes,):
        raise GridValidationError(f"expected {ops.n_nodes} injections, got {injections.shape}")
    scale = max(1.0, float(np.max(np.abs(injections))))
    if abs(injections.sum()) > cfconstants.IDENTITY_TOL * scale:
        raise GridValidationError(f"injections are not balanced (sum {injections.sum()})")
    keep, B_red = _reduced(ops, slack, mode)
    theta = np.zeros(ops.n_nodes)
    theta[keep] = get_solver(mode).factorize(B_red).solve(injections[keep])
    return ops.B_f @ theta
