"""Cross-checks of all computation routes on one grid."""
import logging

import cfconstants
from .conventional import assemble_operators, lodf_from_ptdf_prime, ptdf_conventional, ptdf_prime_conventional
from .dual import build_cycle_operator, ptdf_dual, ptdf_prime_dual, ptdf_prime_qr, ptdf_qr
from .grid_io import Grid
from .oracle import MAX_LODF_NODES, oracle_lodf, oracle_ptdf
from .topology import build_topology, check_identities

VERIFY_COLUMNS = [
    "name", "nodes", "lines", "cycles",
    "ptdf_dual", "ptdf_qr", "ptdf_oracle",
    "ptdf_prime_dual", "ptdf_prime_qr",
    "lodf_dual", "lodf_qr", "lodf_oracle",
    "passed",
]


def method_deviations(grid: Grid, mode=cfconstants.MODE_SPARSE, with_oracle=None, num_parallel=1):
    """Max-abs deviation of every route from the conventional one.

    The oracle is included by default on grids small enough for it; its entries are None
    otherwise. ``passed`` applies the equivalence tolerances to every deviation present.
    """
    if with_oracle is None:
        with_oracle = grid.n_nodes <= MAX_LODF_NODES
    topology = build_topology(grid)
    check_identities(grid, topology)
    ops = assemble_operators(grid, topology.incidence)
    operator = build_cycle_operator(grid, topology.basis, mode)

    ptdf = ptdf_conventional(ops, grid.slack, mode, num_parallel)
    prime = ptdf_prime_conventional(ops, mode, num_parallel)
    lodf = lodf_from_ptdf_prime(prime, topology.bridges)
    prime_dual = ptdf_prime_dual(grid, topology.basis, mode, num_parallel, operator)
    prime_qr = ptdf_prime_qr(grid, topology.basis)

    row = {
        "name": grid.name,
        "nodes": grid.n_nodes,
        "lines": grid.n_lines,
        "cycles": grid.n_cycles,
        "ptdf_dual": ptdf.max_abs_difference(
            ptdf_dual(grid, topology.basis, topology.tree, mode, num_parallel, operator)),
        "ptdf_qr": ptdf.max_abs_difference(ptdf_qr(grid, topology.basis, topology.tree)),
        "ptdf_prime_dual": prime.max_abs_difference(prime_dual),
        "ptdf_prime_qr": prime.max_abs_difference(prime_qr),
        "lodf_dual": lodf.max_abs_difference(lodf_from_ptdf_prime(prime_dual, topology.bridges)),
        "lodf_qr": lodf.max_abs_difference(lodf_from_ptdf_prime(prime_qr, topology.bridges)),
        "ptdf_oracle": None,
        "lodf_oracle": None,
    }
    if with_oracle:
        row["ptdf_oracle"] = ptdf.max_abs_difference(oracle_ptdf(grid))
        row["lodf_oracle"] = lodf.max_abs_difference(oracle_lodf(grid))
    else:
        logging.info(f"{grid.name} has {grid.n_nodes} buses; skipping the oracle comparison")

    ptdf_keys = ["ptdf_dual", "ptdf_qr", "ptdf_oracle", "ptdf_prime_dual", "ptdf_prime_qr"]
    lodf_keys = ["lodf_dual", "lodf_qr", "lodf_oracle"]
    row["passed"] = (all(row[k] is None or row[k] < cfconstants.EQUIVALENCE_TOL for k in ptdf_keys)
                     and all(row[k] is None or row[k] < cfconstants.LODF_EQUIVALENCE_TOL for k in lodf_keys))
    logging.debug(f"Verification of {grid.name}: {row}")
    return row
