"""Counter-based 64-bit generator shared by encoder and decoder.

The generator is SplitMix64: draw number ``i`` of stream ``seed`` is the
xorshift-multiply finalizer applied to ``seed + (i + 1) * GOLDEN`` (mod 2^64).
Any draw is therefore addressable without generating its predecessors.

Constants:
    GOLDEN = 0x9E3779B97F4A7C15
    MIX1   = 0xBF58476D1CE4E5B9  (after xor-shift by 30)
    MIX2   = 0x94D049BB133111EB  (after xor-shift by 27)
    final xor-shift by 31
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1

_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def splitmix64_scalar(seed: int, index: int) -> int:
    """Reference scalar implementation of draw ``index`` of stream ``seed``."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start+count-1`` of stream ``seed`` as uint64."""
    idx = np.arange(count, dtype=np.uint64)
    idx += np.uint64((start + 1) & MASK64)
    with np.errstate(over="ignore"):
        z = idx * GOLDEN
        z += np.uint64(seed & MASK64)
        z ^= z >> _S30
        z *= MIX1
        z ^= z >> _S27
        z *= MIX2
        z ^= z >> _S31
    return z


def fraction_threshold(p: float) -> int:
    """Integer T with ``(x >> 11) < T`` iff the 53-bit fraction of ``x`` is < p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return int(np.ceil(p * 2.0**53))


def uniform_fractions(seed: int, start: int, count: int) -> np.ndarray:
    return (splitmix64(seed, start, count) >> _S11).astype(np.float64) * 2.0**-53


def uniform_ints(seed: int, start: int, count: int, bound: int) -> np.ndarray:
    """Integers in [0, bound) from the 53-bit fractions (floor(u * bound))."""
    return np.floor(uniform_fractions(seed, start, count) * bound).astype(np.int64)


def derive_seed(seed: int, *labels: int) -> int:
    """Deterministic child seed, e.g. per-frame streams from a campaign seed."""
    z = seed & MASK64
    for lab in labels:
        z = splitmix64_scalar(z, lab & MASK64)
    return z
