"""SplitMix64 streams, vectorized.

Output ``i`` of the stream with seed ``s`` is ``mix(s + (i + 1) * GAMMA)``
with the standard SplitMix64 finalizer, so any language can reproduce the
draws from the seed alone.
"""
from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + idx * GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits."""
    return (splitmix64(seed, count, offset) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def complex_uniform(seed: int, count: int) -> np.ndarray:
    """Complex draws with real and imaginary parts uniform on [-1, 1].

    Real parts use outputs 0, 2, 4, ... and imaginary parts 1, 3, 5, ...
    """
    u = 2.0 * uniform(seed, 2 * count) - 1.0
    return u[0::2] + 1j * u[1::2]


def derive_seed(seed: int, *labels: int) -> int:
    """Deterministic child seed for a labelled sub-stream."""
    s = seed & MASK64
    for lab in labels:
        s = int(splitmix64(s ^ (lab & MASK64), 1)[0])
    return s
