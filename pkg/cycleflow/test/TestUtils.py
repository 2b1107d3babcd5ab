import os
import unittest

import numpy as np

from cycleflow.grid_io import build_grid, load_case
from cycleflow.synth import SynthSpec, generate

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')
CASE_DIR_ENV = 'CYCLEFLOW_CASE_DIR'
TIMING_ENV = 'CYCLEFLOW_TIMING'

# Reference two-cycle basis of case5, in the file's line orientation
# (lines 1-2, 1-4, 1-5, 2-3, 3-4, 4-5).
REFERENCE_CYCLE_BASIS = np.array([
    [0, 1],
    [1, -1],
    [-1, 0],
    [0, 1],
    [0, 1],
    [1, 0],
])


def data_path(name):
    return os.path.join(DATA_DIR, name)


def load_fixture(name):
    return load_case(data_path(name))


def external_case(name):
    """Path of an optional large case from $CYCLEFLOW_CASE_DIR; skips the test when unavailable."""
    case_dir = os.environ.get(CASE_DIR_ENV)
    if not case_dir or not os.path.exists(os.path.join(case_dir, name)):
        raise unittest.SkipTest(f"{name} not found; set {CASE_DIR_ENV} to run this test")
    return os.path.join(case_dir, name)


def timing_assertions():
    """Whether wall-clock comparisons should be asserted.

    Skips unless $CYCLEFLOW_TIMING is set; `report` only logs the timings, any other value asserts.
    """
    value = os.environ.get(TIMING_ENV)
    if not value:
        raise unittest.SkipTest(f"timing comparisons are opt-in; set {TIMING_ENV}=1 or {TIMING_ENV}=report")
    return value != 'report'


def triangle_grid(x=0.1):
    return build_grid('triangle', [1, 2, 3], [(1, 2, x), (2, 3, x), (1, 3, x)])


def path_grid(n_nodes, x=0.1):
    return build_grid(f'path{n_nodes}', list(range(1, n_nodes + 1)),
                      [(i, i + 1, x) for i in range(1, n_nodes)])


def random_grids(count, max_nodes, seed=0):
    """Deterministic synthetic grids with 5..max_nodes buses and 0..N chords."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n_nodes = int(rng.integers(5, max_nodes + 1))
        n_chords = int(rng.integers(0, n_nodes + 1))
        yield generate(SynthSpec(n_nodes, n_chords, seed=seed * 10007 + i))
