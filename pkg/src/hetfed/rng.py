"""Deterministic RNG streams.

Every random draw in the simulator comes from a generator built here. A
stream is identified by the master seed plus an integer path, so any unit
of work (one client in one round, one repeat of one experiment) can be
recomputed in isolation and results never depend on scheduling order.
"""
from __future__ import annotations

import numpy as np

# stream tags, one per purpose so paths never collide
DATA = 1
SPLIT = 2
PARTITION = 3
INIT = 4
SELECT = 5
LOCAL = 6
MALICIOUS = 7
HIST = 8
RESAMPLE = 9
EVAL = 10
DEFENSE = 11
REPEAT = 12
FAKE = 13
IID = 14


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream at `path` under `seed`."""
    if not all(isinstance(p, (int, np.integer)) and p >= 0 for p in path):
        raise ValueError(f"stream path must be non-negative ints, got {path!r}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)


def child_seed(seed: int, *path: int) -> int:
    """Derived integer seed, for APIs that take a seed instead of a Generator."""
    return int(substream(seed, *path).integers(0, 2**63 - 1))
