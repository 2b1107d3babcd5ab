"""Random connected test grids with a chosen number of buses and cycles."""
import logging
from dataclasses import dataclass
from typing import Tuple

import networkx as nx
import numpy as np

from .errors import GridValidationError
from .grid_io import Grid, build_grid

DEFAULT_REACTANCE_RANGE = (0.01, 0.1)


@dataclass(frozen=True)
class SynthSpec:
    n_nodes: int
    n_chords: int
    reactance_range: Tuple[float, float] = DEFAULT_REACTANCE_RANGE
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise GridValidationError(f"a grid needs at least 2 buses, got {self.n_nodes}")
        if self.n_chords < 0:
            raise GridValidationError(f"chord count must be non-negative, got {self.n_chords}")
        if self.n_chords > self.max_chords:
            raise GridValidationError(
                f"{self.n_nodes} buses admit at most {self.max_chords} chords, {self.n_chords} requested")
        x_min, x_max = self.reactance_range
        if x_min <= 0 or x_max < x_min:
            raise GridValidationError(f"invalid reactance range {self.reactance_range}")

    @property
    def max_chords(self):
        return self.n_nodes * (self.n_nodes - 1) // 2 - (self.n_nodes - 1)

    @property
    def name(self):
        return f"synth_{self.n_nodes}_{self.n_chords}_{self.seed}"


def _random_tree(n_nodes, rng):
    if n_nodes == 2:
        return [(0, 1)]
    sequence = rng.integers(0, n_nodes, size=n_nodes - 2).tolist()
    return list(nx.from_prufer_sequence(sequence).edges())


def _random_chords(n_nodes, n_chords, tree_pairs, rng):
    """Distinct node pairs outside the tree, uniformly without replacement."""
    if n_chords == 0:
        return []
    available = n_nodes * (n_nodes - 1) // 2 - len(tree_pairs)
    if 2 * n_chords > available:
        candidates = [(u, v) for u in range(n_nodes) for v in range(u + 1, n_nodes)
                      if frozenset((u, v)) not in tree_pairs]
        picked = rng.choice(len(candidates), size=n_chords, replace=False)
        return [candidates[i] for i in sorted(picked)]

    chosen = []
    seen = set(tree_pairs)
    while len(chosen) < n_chords:
        u, v = rng.integers(0, n_nodes, size=2).tolist()
        pair = frozenset((u, v))
        if u == v or pair in seen:
            continue
        seen.add(pair)
        chosen.append((u, v))
    return chosen


def generate(spec: SynthSpec) -> Grid:
    """Uniform random labelled spanning tree plus ``n_chords`` extra lines; same seed, same grid."""
    rng = np.random.default_rng(spec.seed)
    tree = _random_tree(spec.n_nodes, rng)
    tree_pairs = {frozenset(edge) for edge in tree}
    chords = _random_chords(spec.n_nodes, spec.n_chords, tree_pairs, rng)

    pairs = tree + chords
    flips = rng.random(len(pairs)) < 0.5
    reactances = rng.uniform(*spec.reactance_range, size=len(pairs))
    raw_lines = []
    for (u, v), flip, x in zip(pairs, flips, reactances):
        tail, head = (v, u) if flip else (u, v)
        raw_lines.append((tail + 1, head + 1, float(x)))

    logging.debug(f"Generated {spec.name}: {len(tree)} tree lines, {len(chords)} chords")
    return build_grid(spec.name, list(range(1, spec.n_nodes + 1)), raw_lines)
