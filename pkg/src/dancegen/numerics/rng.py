"""Counter-based SplitMix64 random number generator.

Draw ``i`` (0-based) of a generator seeded with ``s`` is::

    z = (s + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    out = z ^ (z >> 31)

Uniform floats take the top 53 bits, ``(out >> 11) * 2**-53``.  Gaussian
draws use Box-Muller on consecutive uniform pairs.  Because every draw is a
pure function of ``(seed, counter)`` the stream is identical on any platform
with IEEE doubles, and blocks can be generated vectorised.
"""

from __future__ import annotations

import zlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """Vectorised SplitMix64 output for the given draw counters."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + (counters.astype(np.uint64) + np.uint64(1)) * _GOLDEN
        return _mix(z)


class SeededRng:
    """Deterministic generator; the only mutable state is the draw counter."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed) & _MASK
        self.counter = 0

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, counter={self.counter})"

    def next_u64(self, n: int) -> np.ndarray:
        counters = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        return splitmix64(self.seed, counters)

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        """Uniform draws on ``[low, high)``; a bare float when ``size`` is None."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        u = low + (high - low) * u
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, size=None, loc: float = 0.0, scale: float = 1.0):
        """Standard normal draws via Box-Muller (both outputs of each pair are used)."""
        n = 1 if size is None else int(np.prod(size))
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        u1 = 1.0 - u[0::2]  # (0, 1], keeps the log finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        z = loc + scale * z[:n]
        return float(z[0]) if size is None else z.reshape(size)

    def integers(self, high: int, size=None):
        """Integers in ``[0, high)`` by scaling a uniform draw."""
        u = self.uniform(size)
        out = np.minimum((np.asarray(u) * high).astype(np.int64), high - 1)
        return int(out) if size is None else out

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = np.arange(n)
        if n < 2:
            return perm
        u = self.uniform(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = min(int(u[k] * (i + 1)), i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def spawn(self, key) -> "SeededRng":
        """Independent child stream derived from this seed and ``key``.

        The child does not depend on how many draws the parent has made.
        """
        tag = zlib.crc32(str(key).encode("utf-8"))
        child = splitmix64(self.seed ^ (tag << 32 | tag), np.array([0], dtype=np.uint64))
        return SeededRng(int(child[0]))
