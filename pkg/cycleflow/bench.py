"""Wall-clock comparison of the conventional and the cycle-flow PTDF computation.

For every grid both methods are timed twice: the whole PTDF construction from the
topology matrices, and the factorize-and-solve step alone. One warm-up run per
measurement is discarded, short runs are batched until they span enough timer ticks,
and the results are checked for equivalence afterwards.
"""
import logging
import math
import time
from dataclasses import dataclass
from timeit import default_timer
from typing import List, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sps

import cfconstants
from .conventional import assemble_operators, ptdf_conventional, reduced_system
from .dual import build_cycle_operator, ptdf_dual
from .errors import BenchConfigError, EquivalenceError, FitError
from .grid_io import Grid
from .solvers import get_solver
from .topology import build_topology


@dataclass(frozen=True)
class MethodTiming:
    """Seconds per run for one method on one grid."""
    total_mean: float
    total_sd: float
    total_mom: float
    solve_mean: float
    solve_sd: float
    solve_dimension: int
    nnz: int


def _ratio(numerator, denominator):
    return numerator / denominator if denominator > 0 else math.inf


@dataclass(frozen=True)
class BenchReport:
    name: str
    nodes: int
    lines: int
    cycles: int
    mode: str
    repetitions: int
    conventional: MethodTiming
    dual: MethodTiming

    @property
    def cycles_per_nodes(self):
        return self.cycles / self.nodes

    @property
    def speedup(self):
        return _ratio(self.conventional.total_mean, self.dual.total_mean)

    @property
    def solve_speedup(self):
        return _ratio(self.conventional.solve_mean, self.dual.solve_mean)

    def to_row(self):
        row = {
            "name": self.name,
            "nodes": self.nodes,
            "lines": self.lines,
            "cycles": self.cycles,
            "cycles_per_nodes": self.cycles_per_nodes,
            "mode": self.mode,
            "repetitions": self.repetitions,
            "speedup": self.speedup,
            "solve_speedup": self.solve_speedup,
        }
        for prefix, timing in (("conventional", self.conventional), ("dual", self.dual)):
            row[f"{prefix}_total_mean"] = timing.total_mean
            row[f"{prefix}_total_sd"] = timing.total_sd
            row[f"{prefix}_total_mom"] = timing.total_mom
            row[f"{prefix}_solve_mean"] = timing.solve_mean
            row[f"{prefix}_solve_sd"] = timing.solve_sd
            row[f"{prefix}_solve_dim"] = timing.solve_dimension
            row[f"{prefix}_nnz"] = timing.nnz
        return row


def timer_resolution():
    return time.get_clock_info("perf_counter").resolution


def measure(fn, repetitions, timer=default_timer, resolution=None) -> np.ndarray:
    """Seconds per call of ``fn`` for each of ``repetitions`` samples.

    The first call is a warm-up and is not recorded. Calls shorter than
    MIN_TIMER_TICKS timer ticks are repeated in batches and the batch time is divided back.
    """
    resolution = timer_resolution() if resolution is None else resolution
    start = timer()
    fn()
    elapsed = timer() - start

    threshold = cfconstants.MIN_TIMER_TICKS * resolution
    batch = 1 if elapsed >= threshold else max(1, math.ceil(threshold / max(elapsed, resolution)))
    if batch > 1:
        logging.debug(f"Run takes {elapsed:.3e}s, batching {batch} calls per sample")

    samples = np.empty(repetitions)
    for i in range(repetitions):
        start = timer()
        for _ in range(batch):
            fn()
        samples[i] = (timer() - start) / batch
    return samples


def median_of_means(samples, blocks=cfconstants.MEDIAN_OF_MEANS_BLOCKS):
    chunks = np.array_split(np.asarray(samples, dtype=float), min(blocks, len(samples)))
    return float(np.median([chunk.mean() for chunk in chunks]))


def _nnz(K):
    return int(K.nnz) if sps.issparse(K) else int(np.count_nonzero(K))


def _timing(total, solve, dimension, nnz) -> MethodTiming:
    return MethodTiming(float(total.mean()), float(total.std(ddof=1)), median_of_means(total),
                        float(solve.mean()), float(solve.std(ddof=1)), dimension, nnz)


def bench_grid(grid: Grid, repetitions=cfconstants.DEFAULT_REPETITIONS, mode=cfconstants.MODE_SPARSE,
               timer=default_timer, resolution=None) -> BenchReport:
    """Times both PTDF routes on one grid; topology is built once beforehand, as it is shared
    by every base case of a grid."""
    if repetitions < cfconstants.MIN_REPETITIONS:
        raise BenchConfigError(f"at least {cfconstants.MIN_REPETITIONS} repetitions are needed, got {repetitions}")
    if mode not in cfconstants.MODES:
        raise BenchConfigError(f"unknown mode {mode}; choose from {cfconstants.MODES}")

    topology = build_topology(grid)
    slack = grid.slack

    def conventional_total():
        return ptdf_conventional(assemble_operators(grid, topology.incidence), slack, mode)

    def dual_total():
        return ptdf_dual(grid, topology.basis, topology.tree, mode)

    ops = assemble_operators(grid, topology.incidence)
    _, B_red, conventional_rhs = reduced_system(ops, slack, mode)
    operator = build_cycle_operator(grid, topology.basis, mode)
    dual_rhs = (operator.Xf @ topology.tree.matrix).toarray()

    def conventional_solve():
        return get_solver(mode).factorize(B_red).solve(conventional_rhs)

    def dual_solve():
        return get_solver(mode).factorize(operator.M).solve(dual_rhs)

    logging.info(f"Benchmarking {grid.name} ({mode}, R={repetitions}): N={grid.n_nodes} L={grid.n_lines} "
                 f"cycles={grid.n_cycles}")
    conventional = _timing(measure(conventional_total, repetitions, timer, resolution),
                           measure(conventional_solve, repetitions, timer, resolution),
                           B_red.shape[0], _nnz(B_red))
    dual = _timing(measure(dual_total, repetitions, timer, resolution),
                   measure(dual_solve, repetitions, timer, resolution),
                   operator.dimension, _nnz(operator.M))

    verify_equivalence(grid, conventional_total(), dual_total())
    report = BenchReport(grid.name, grid.n_nodes, grid.n_lines, grid.n_cycles, mode, repetitions, conventional, dual)
    logging.info(f"{grid.name}: conventional {conventional.total_mean:.3e}s, dual {dual.total_mean:.3e}s, "
                 f"speedup {report.speedup:.2f}")
    return report


def verify_equivalence(grid: Grid, conventional, dual):
    deviation = conventional.max_abs_difference(dual)
    if deviation >= cfconstants.EQUIVALENCE_TOL:
        raise EquivalenceError(f"{grid.name}: dual and conventional PTDF differ by {deviation:.3e}")
    if conventional.solve_dimension != grid.n_nodes - 1 or dual.solve_dimension != grid.n_cycles:
        raise EquivalenceError(f"{grid.name}: unexpected solve dimensions {conventional.solve_dimension} "
                               f"and {dual.solve_dimension}")
    return deviation


def run_bench(grids: Sequence[Grid], repetitions=cfconstants.DEFAULT_REPETITIONS, mode=cfconstants.MODE_SPARSE,
              timer=default_timer, resolution=None) -> List[BenchReport]:
    """Benchmarks the grids one after another on the calling thread."""
    if repetitions < cfconstants.MIN_REPETITIONS:
        raise BenchConfigError(f"at least {cfconstants.MIN_REPETITIONS} repetitions are needed, got {repetitions}")
    return [bench_grid(grid, repetitions, mode, timer, resolution) for grid in grids]


def reports_to_frame(reports: Sequence[BenchReport]) -> pd.DataFrame:
    return pd.DataFrame([report.to_row() for report in reports], columns=cfconstants.BENCH_CSV_COLUMNS)


def write_reports_csv(reports, path):
    reports_to_frame(reports).to_csv(path, index=False)


def read_reports_csv(path) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [column for column in ("cycles_per_nodes", "speedup") if column not in frame.columns]
    if missing:
        raise FitError(f"{path} is missing the columns {missing}")
    return frame


def fit_speedup_curve(reports):
    """Least-squares fit of speedup = alpha * ratio^-gamma in log-log space; returns (alpha, gamma).

    ``reports`` is a sequence of BenchReport or a frame with ``cycles_per_nodes`` and
    ``speedup`` columns. At least four points spanning a decade of ratio are required.
    """
    frame = reports if isinstance(reports, pd.DataFrame) else reports_to_frame(reports)
    ratios = frame["cycles_per_nodes"].to_numpy(dtype=float)
    speedups = frame["speedup"].to_numpy(dtype=float)
    if len(ratios) < 4:
        raise FitError(f"need at least 4 reports to fit, got {len(ratios)}")
    if np.any(ratios <= 0) or np.any(speedups <= 0):
        raise FitError("ratios and speedups must be positive; radial grids cannot be fitted")
    if ratios.max() / ratios.min() < 10:
        raise FitError(f"ratios span {ratios.min():.3g}..{ratios.max():.3g}, less than a decade")

    slope, intercept = np.polyfit(np.log(ratios), np.log(speedups), 1)
    alpha, gamma = float(np.exp(intercept)), float(-slope)
    logging.info(f"Speedup fit over {len(ratios)} grids: alpha={alpha:.4f} gamma={gamma:.4f}")
    return alpha, gamma
