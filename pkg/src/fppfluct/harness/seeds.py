"""Per-replica seed derivation.

Every replica gets its own stream keyed by ``(master_seed, *keys)`` through
numpy's SeedSequence, so results never depend on which worker ran them.
"""

import numpy as np


def _sequence(master, keys):
    return np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))


def replica_seed(master, *keys) -> int:
    """64-bit environment seed for replica ``keys``."""
    lo, hi = _sequence(master, keys).generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def replica_rng(master, *keys) -> np.random.Generator:
    return np.random.default_rng(_sequence(master, keys))
