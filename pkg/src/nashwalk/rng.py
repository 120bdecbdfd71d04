"""Counter-based keyed randomness.

Every random decision in the package is a pure function of a 64-bit seed and
some integer coordinates (edge base/axis, trial index, step index), evaluated
through iterated SplitMix64 finalizer passes.  There is no hidden generator
state, so lazy and exhaustive media agree edge-for-edge, walks replay exactly,
and trials can be computed in any order or process without changing results.

Scalar helpers use plain Python ints masked to 64 bits; `*_np` variants do the
same arithmetic on numpy uint64 arrays.  A test pins them against each other.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Domain-separation tags (ASCII, little-endian) so medium edges, percolation
# edges, per-trial seeds and per-step draws never share a hash stream.
TAG_MEDIUM = int.from_bytes(b"medium", "little")
TAG_WALK = int.from_bytes(b"walk", "little")
TAG_PERC = int.from_bytes(b"perc", "little")
TAG_STEP = int.from_bytes(b"step", "little")


def mix64(x: int) -> int:
    """SplitMix64 finalizer (one full avalanche pass) on a 64-bit int."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def fold(seed: int, *words: int) -> int:
    """Absorb integer coordinates into a seed, one mix pass per word."""
    h = mix64(seed & MASK64)
    for w in words:
        h = mix64(h ^ (w & MASK64))
    return h


def mix64_np(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(_GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))


def fold_np(seed: int, *words) -> np.ndarray:
    """Vectorized fold: each word is an int or a uint64 array (broadcast).

    Scalar words are absorbed with plain-int arithmetic until the first
    array shows up; numpy scalar ops would warn on intended wraparound.
    """
    h = mix64(seed & MASK64)
    out = None
    for w in words:
        if out is None:
            if isinstance(w, np.ndarray):
                out = mix64_np(np.uint64(h) ^ w.astype(np.uint64))
            else:
                h = mix64(h ^ (int(w) & MASK64))
        else:
            if isinstance(w, np.ndarray):
                out = mix64_np(out ^ w.astype(np.uint64))
            else:
                out = mix64_np(out ^ np.uint64(int(w) & MASK64))
    if out is None:
        return np.uint64(h)
    return out


def unit_interval(h: int) -> float:
    """Map a 64-bit hash to [0, 1) using the top 53 bits."""
    return (h >> 11) * (2.0 ** -53)


def threshold(p: float) -> int:
    """Exact floor(p * 2^64) for a binary64 p in [0, 1].

    Multiplying a float by a power of two is exact, so int() truncates the
    true product.
    """
    return int(p * 18446744073709551616.0)  # 2**64
