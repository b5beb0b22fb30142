# src/ldp/hash_utils.py
from __future__ import annotations

from typing import Union

import numpy as np

# Each local-hashing user picks a 64-bit seed; the seed names one member H of the
# hash family. H(v) = mix64(seed + (v + 1) * GOLDEN), reduced to [g] by the high
# 32 bits times g (widening multiply), so every bucket's probability is within
# 2^-32 of 1/g.

MASK64 = 0xFFFFFFFFFFFFFFFF
MAX_G = 1 << 32

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)

ArrayLike = Union[int, np.ndarray]


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (wraps mod 2^64)."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _as_u64(x: ArrayLike) -> np.ndarray:
    if isinstance(x, np.ndarray) and x.dtype == np.uint64:
        return x
    if isinstance(x, (int, np.integer)):
        return np.array([int(x) & MASK64], dtype=np.uint64)
    return np.asarray(x, dtype=np.int64).astype(np.uint64)


def hash_values(seeds: ArrayLike, values: ArrayLike, g: int) -> np.ndarray:
    """
    Vectorised H_seed(v) in [g]. `seeds` and `values` broadcast against each
    other, e.g. seeds[:, None] with values[None, :] hashes every value under
    every seed.
    """
    if g < 2 or g > MAX_G:
        raise ValueError(f"g must be in [2, 2^32], got {g}")

    s = _as_u64(seeds)
    v = _as_u64(values)
    with np.errstate(over="ignore"):
        h = mix64(s + (v + np.uint64(1)) * _GOLDEN)
        return ((h >> _S32) * np.uint64(g)) >> _S32


def lh_hash(seed: int, v: int, g: int) -> int:
    """H_seed(v) for one seed and one value."""
    return int(hash_values(int(seed), int(v), g)[0])


def draw_seeds(rng: np.random.Generator, size: int) -> np.ndarray:
    """Fresh uniform 64-bit seeds, one per user."""
    return rng.integers(0, MAX_G * MAX_G, size=size, dtype=np.uint64, endpoint=False)
