"""Deterministic random-number streams for parallel Monte Carlo work.

Every random draw in the package comes from a Philox counter-based
generator keyed by (master seed, *stream key).  Streams depend only on
their key, never on execution order, so replications and days can be
simulated in any order, on any number of workers, with bit-identical
results.
"""

from __future__ import annotations

import numpy as np

# Stream tags: last component of a stream key.  Kept as module constants so
# the key layout is visible in one place.
PATH = 0      # Euler path and jump draws for one simulated day
ETA = 1       # auxiliary two-point draws consumed by the PZ statistics
NOISE = 2     # microstructure noise injection


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator for stream `key` under `master_seed`.

    Typical keys are (replication, day, tag) or (cell, replication, tag).
    """
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
