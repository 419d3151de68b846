"""Counter-based normal deviates (SplitMix64 finalizer + Box-Muller).

Deviate pair ``c`` of a trajectory depends only on (key, c), so any
trajectory can be regenerated independently of scheduling. The compiled
kernel implements the identical integer recipe.
"""
from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SEED_SALT = 0x5851F42D4C957F2D
_INV53 = 1.0 / (1 << 53)


def mix64_int(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def trajectory_key(seed: int, index: int) -> int:
    """64-bit stream key for trajectory ``index`` of run ``seed``."""
    return mix64_int(mix64_int(seed ^ SEED_SALT) + ((index + 1) * GOLDEN & MASK))


def trajectory_keys(seed: int, indices) -> np.ndarray:
    return np.array([trajectory_key(seed, int(i)) for i in indices], dtype=np.uint64)


def mix64(z: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def normal_pairs(keys: np.ndarray, pair_index: np.ndarray):
    """Two standard normals per (key, pair_index); shapes broadcast.

    Returns ``(z0, z1)`` with the cosine and sine branch of Box-Muller.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    c = np.asarray(pair_index, dtype=np.uint64)
    two = np.uint64(2)
    g = np.uint64(GOLDEN)
    with np.errstate(over="ignore"):
        ba = mix64(keys + (two * c + np.uint64(1)) * g)
        bb = mix64(keys + (two * c + two) * g)
    ua = (ba >> np.uint64(11)).astype(np.float64) * _INV53
    ub = (bb >> np.uint64(11)).astype(np.float64) * _INV53
    r = np.sqrt(-2.0 * np.log1p(-ua))
    t = 2.0 * np.pi * ub
    return r * np.cos(t), r * np.sin(t)


class CounterStream:
    """Sequential view of one trajectory's counter-based deviates."""

    def __init__(self, key: int, counter: int = 0):
        self.key = np.uint64(key)
        self.counter = counter

    @classmethod
    def for_trajectory(cls, seed: int, index: int) -> "CounterStream":
        return cls(trajectory_key(seed, index))

    def normals(self, n: int) -> np.ndarray:
        if n % 2:
            raise ValueError("deviates come in pairs")
        idx = np.arange(self.counter, self.counter + n // 2, dtype=np.uint64)
        z0, z1 = normal_pairs(self.key, idx)
        self.counter += n // 2
        out = np.empty(n)
        out[0::2], out[1::2] = z0, z1
        return out
