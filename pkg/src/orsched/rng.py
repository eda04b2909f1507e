"""SplitMix64 generator used everywhere randomness must be bit-reproducible."""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


class SplitMix64:
    """64-bit SplitMix generator; identical output for identical seeds on any platform."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MUL1) & _MASK
        z = ((z ^ (z >> 27)) * _MUL2) & _MASK
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform-ish value in [0, n) via modulo reduction (n must be positive)."""
        if n <= 0:
            raise ValueError("randrange needs a positive bound")
        return self.next() % n


def shuffle(items: list, seed: int) -> None:
    """In-place Fisher-Yates shuffle from the last index down, index = next() mod (i+1)."""
    rng = SplitMix64(seed)
    for i in range(len(items) - 1, 0, -1):
        j = rng.next() % (i + 1)
        items[i], items[j] = items[j], items[i]


def mix_seed(base: int, *values: int) -> int:
    """Fold extra integers into a base seed, one SplitMix64 step per value."""
    state = base & _MASK
    for v in values:
        state = SplitMix64(state ^ (v & _MASK)).next()
    return state
