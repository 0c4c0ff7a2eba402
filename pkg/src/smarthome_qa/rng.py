"""Deterministic 64-bit PRNG (splitmix64) and a Fisher-Yates shuffle on top.

Used wherever reproducibility matters across platforms and Python versions:
dataset splits and LDA initialization/sampling. Python's ``random`` module is
also deterministic, but pinning the exact algorithm makes the byte-level
behaviour part of this package's contract instead of the interpreter's.
"""

from __future__ import annotations

from typing import Iterable, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """The splitmix64 sequence of Steele, Lea & Flood."""

    def __init__(self, seed: int) -> None:
        self._state = seed & MASK64

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Uniform int in [0, n). Plain modulo; bias is immaterial for n << 2**64."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_float(self) -> float:
        """Uniform float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


def shuffled(items: Iterable[T], seed: int) -> list[T]:
    """New list holding a Fisher-Yates shuffle of ``items`` under ``seed``."""
    out = list(items)
    rng = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
