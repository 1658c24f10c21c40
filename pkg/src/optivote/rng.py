"""Deterministic stream derivation from a master seed.

Every stochastic component receives its own ``numpy.random.Generator``
derived from (master seed, purpose tag, round, node).  Streams are
therefore independent of evaluation order and of any parallel schedule.
"""

import numpy as np

# Purpose tags keep streams for different subsystems disjoint.
TAG_DATA = 1
TAG_SELECT = 2
TAG_GRADIENT = 3
TAG_CHANNEL = 4
TAG_NOISE = 5
TAG_MC = 6


def derive(seed: int, *keys: int) -> np.random.Generator:
    """Return a Generator keyed by the master seed plus integer keys."""
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])
