"""Deterministic stream derivation.

Every random draw in the library comes from a Generator produced by
``stream(...)`` with a fixed integer key. Keys are tuples
(master_seed, purpose_tag, trial, ...) so results are reproducible no matter
how trials are scheduled across workers.
"""

import numpy as np

# purpose tags keep unrelated draws on disjoint streams
TAG_POINTS = 1
TAG_COUNTS = 2
TAG_THIN = 3
TAG_NET = 4
TAG_PARTITION = 5
TAG_MEASURE = 6
TAG_TRANSPORT = 7
TAG_CHECK = 8
TAG_BUCKET = 9
TAG_TRIAL = 10


def stream(*key):
    """Generator derived from a tuple of non-negative integers."""
    flat = []
    for k in key:
        k = int(k)
        if k < 0:
            raise ValueError("stream keys must be non-negative")
        flat.append(k)
    return np.random.default_rng(np.random.SeedSequence(tuple(flat)))


def spawn_seed(rng=None):
    """Fresh 63-bit master seed (used when no seed was supplied)."""
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.integers(0, 2**63 - 1))
