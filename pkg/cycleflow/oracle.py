"""Brute-force reference values for small grids.

Nothing here reuses the production assembly or solvers: the nodal matrix is built entry by
entry, inverted with an eigendecomposition (Moore-Penrose pseudo-inverse) and outages are
handled by rebuilding the grid without the line.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet

import numpy as np

import cfconstants
from .conventional import SensitivityMatrix
from .errors import GridValidationError
from .grid_io import Grid

MAX_PTDF_NODES = 500
MAX_LODF_NODES = 200
ZERO_EIGENVALUE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class OracleResult:
    ptdf: SensitivityMatrix
    lodf: SensitivityMatrix

    @property
    def undefined_columns(self) -> FrozenSet[int]:
        return self.lodf.undefined_columns


def nodal_susceptance(n_nodes, lines):
    """B_nk = -b_nk for neighbours, sum of incident b_nj on the diagonal."""
    B = np.zeros((n_nodes, n_nodes))
    for i, j, b in lines:
        B[i, i] += b
        B[j, j] += b
        B[i, j] -= b
        B[j, i] -= b
    return B


def pseudo_inverse(B):
    """Moore-Penrose pseudo-inverse of a symmetric matrix and the number of zero eigenvalues."""
    eigenvalues, eigenvectors = np.linalg.eigh(B)
    cutoff = ZERO_EIGENVALUE_RTOL * max(1.0, np.abs(eigenvalues).max())
    zero = np.abs(eigenvalues) < cutoff
    inverted = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, eigenvalues))
    return (eigenvectors * inverted) @ eigenvectors.T, int(zero.sum())


def _lines(grid: Grid):
    return [(branch.tail, branch.head, branch.susceptance) for branch in grid.branches]


def oracle_ptdf(grid: Grid, slack=None) -> SensitivityMatrix:
    """PTDF[(i,j), r] = b_ij (X_is - X_ir - X_js + X_jr) with X the pseudo-inverse of B."""
    if grid.n_nodes > MAX_PTDF_NODES:
        raise GridValidationError(f"oracle PTDF is limited to {MAX_PTDF_NODES} buses, grid has {grid.n_nodes}")
    s = grid.slack if slack is None else slack
    X, _ = pseudo_inverse(nodal_susceptance(grid.n_nodes, _lines(grid)))
    tails, heads, b = grid.tails, grid.heads, grid.susceptances
    values = b[:, None] * ((X[tails, s] - X[heads, s])[:, None] - X[tails, :] + X[heads, :])
    return SensitivityMatrix(values, cfconstants.PTDF, cfconstants.METHOD_ORACLE, s)


def _flows(X, lines, injections):
    theta = X @ injections
    return np.array([b * (theta[i] - theta[j]) for i, j, b in lines])


def oracle_lodf(grid: Grid) -> SensitivityMatrix:
    """LODF by removing each line in turn and comparing flows before and after.

    Each outage is probed with the outaged line's own unit transaction, which always puts a
    flow of PTDF'_ll > 0 on it. Lines whose removal islands the grid are flagged.
    """
    if grid.n_nodes > MAX_LODF_NODES:
        raise GridValidationError(f"oracle LODF is limited to {MAX_LODF_NODES} buses, grid has {grid.n_nodes}")
    lines = _lines(grid)
    X, _ = pseudo_inverse(nodal_susceptance(grid.n_nodes, lines))

    values = np.full((grid.n_lines, grid.n_lines), np.nan)
    undefined = set()
    for outaged in range(grid.n_lines):
        i, j, _ = lines[outaged]
        injection = np.zeros(grid.n_nodes)
        injection[i], injection[j] = 1.0, -1.0
        flows = _flows(X, lines, injection)

        remaining = [line for k, line in enumerate(lines) if k != outaged]
        X_after, zero_count = pseudo_inverse(nodal_susceptance(grid.n_nodes, remaining))
        if zero_count > 1:
            undefined.add(outaged)
            continue
        after = np.insert(_flows(X_after, remaining, injection), outaged, 0.0)
        values[:, outaged] = (after - flows) / flows[outaged]

    logging.debug(f"Oracle LODF for {grid.name}: {len(undefined)} islanding outages")
    return SensitivityMatrix(values, cfconstants.LODF, cfconstants.METHOD_ORACLE,
                             undefined_columns=frozenset(undefined))


def oracle(grid: Grid) -> OracleResult:
    return OracleResult(oracle_ptdf(grid), oracle_lodf(grid))
