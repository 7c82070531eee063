"""Portable seeded random number generation.

Instance ensembles must be reproducible bit-for-bit across platforms and
library versions, so we do not rely on numpy's generator streams. Instead we
use SplitMix64 (Steele, Lea & Flood's mixing constants) for the raw 64-bit
stream and an explicit Box-Muller transform for Gaussians. Both are fixed
here and covered by regression tests that freeze the first draws.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *indices: int) -> int:
    """Deterministically derive a sub-stream seed from a base seed and indices.

    Used to split an ensemble seed into independent per-(truth, copy) seeds.
    """
    h = base & _MASK64
    for k in indices:
        h = mix64(h ^ ((k + 1) * _GOLDEN & _MASK64))
    return h


class SplitMix64:
    """Seedable 64-bit generator with uniform, integer and Gaussian draws.

    One ``normal()`` call consumes exactly two 64-bit words (no caching of
    the Box-Muller sine branch), so the stream position is a pure function
    of the number of calls.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double in (0, 1]; never 0, so it is safe under log()."""
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        """Gaussian draw via Box-Muller (cosine branch only)."""
        u1 = self.uniform()
        u2 = (self.next_u64() >> 11) * 2.0 ** -53
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return mean + std * z

    def randrange(self, upper: int) -> int:
        """Uniform integer in [0, upper), by rejection to avoid modulo bias."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        limit = _MASK64 - (_MASK64 + 1) % upper
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % upper
