"""Counter-based pseudorandomness shared by every sampler in the package.

All randomness flows from one 64-bit seed.  Each draw is a pure function of
(seed, key path), so a result never depends on call order, chunking or
thread count; that is what makes artifacts byte-identical across reruns.
"""

from __future__ import annotations

import random

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """SplitMix64 finalizer: one avalanche pass over a 64-bit word."""
    x = (x + _GOLDEN) & MASK64
    x ^= x >> 30
    x = (x * _MULT1) & MASK64
    x ^= x >> 27
    x = (x * _MULT2) & MASK64
    x ^= x >> 31
    return x


def derive(seed: int, *keys: int) -> int:
    """Derive an independent 64-bit value from a seed and a key path.

    Keys wider than 64 bits are folded; the fold keeps distinct small keys
    distinct, which is all the samplers need.
    """
    h = mix64(seed & MASK64)
    for k in keys:
        k = int(k)
        if k < 0 or k > MASK64:
            k = (k & MASK64) ^ ((k >> 64) & MASK64)
        h = mix64(h ^ k)
    return h


def local_rng(seed: int, *keys: int) -> random.Random:
    """A stdlib Random stream bound to (seed, keys)."""
    return random.Random(derive(seed, *keys))


def mix64_np(x: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer on a uint64 array."""
    x = (x + np.uint64(_GOLDEN)) & np.uint64(MASK64)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MULT1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MULT2)
    x ^= x >> np.uint64(31)
    return x


def derive_np(seed: int, keys: np.ndarray) -> np.ndarray:
    """Vectorized derive() for one level of integer keys."""
    h = np.uint64(mix64(seed & MASK64))
    return mix64_np(keys.astype(np.uint64) ^ h)


def p_threshold(p: float) -> int | None:
    """Acceptance threshold for a probability-p coin on 64-bit hashes.

    Returns None when every hash should be accepted (p >= 1).  The coin is
    quantized to multiples of 2**-64, which is far below any tolerance used
    in this package.
    """
    if p >= 1.0:
        return None
    if p <= 0.0:
        return 0
    return int(p * 2.0**64)
