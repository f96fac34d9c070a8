"""Counter-based seed derivation.

Every random task gets its own generator built from ``(master, *keys)`` via
``numpy.random.SeedSequence``. The stream for a task therefore depends only
on its keys, never on scheduling order or the number of worker threads.
"""

from __future__ import annotations

import numpy as np

# task tags keep streams for different purposes apart
EXPANSION = 1
SPANNING_TREE = 2
SKELETON = 3
REWIRE = 4
GENERATOR = 5
CHECKPOINT = 6
PROFILE = 7
POSITION = 8


def rng(master: int, *keys: int) -> np.random.Generator:
    """Generator for task ``keys`` under ``master``."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(master: int, *keys: int) -> int:
    """A 63-bit integer seed for a sub-task, derived from ``(master, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(2, np.uint64)[0] >> np.uint64(1))
