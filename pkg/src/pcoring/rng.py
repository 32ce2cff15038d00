"""Portable seeded random stream for randomized initial conditions.

SplitMix64 (64-bit state, increment 0x9E3779B97F4A7C15) is used so that
any implementation can reproduce the exact sequence of initial phases
from a seed. Doubles are formed from the top 53 bits of each output.

Reference vector: seed 0 yields 0xE220A8397B1DCDAF as its first output.
"""
from __future__ import annotations

import math

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return low + (high - low) * self.random()

    def integers(self, low: int, high: int) -> int:
        """Integer in [low, high) by scaling a uniform double."""
        if high <= low:
            raise ValueError("empty integer range")
        return low + min(int(math.floor(self.random() * (high - low))), high - low - 1)

    def choice(self, seq):
        return seq[self.integers(0, len(seq))]

    def uniform_vector(self, n: int, low: float = 0.0, high: float = 1.0) -> list:
        return [self.uniform(low, high) for _ in range(n)]
