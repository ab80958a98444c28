"""Seeded stream splitting for reproducible, schedule-invariant replication.

Every random draw in the toolkit comes from a numpy Generator obtained via
`substream(master, index)`. The stream seed is a documented hash of the
master seed and the task index,

    stream_seed = splitmix64(master XOR (index * GOLDEN))

with GOLDEN the 64-bit golden-ratio constant, so replicate streams are
independent of each other and of the order in which tasks are scheduled.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def substream_seed(master: int, index: int) -> int:
    """Derive the 64-bit seed of task `index` from a master seed."""
    return _splitmix64((int(master) ^ ((int(index) * _GOLDEN) & _MASK)) & _MASK)


def substream(master: int, index: int) -> np.random.Generator:
    """Generator for task `index`; identical (master, index) gives identical draws."""
    return np.random.Generator(np.random.PCG64(substream_seed(master, index)))
