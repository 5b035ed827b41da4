"""Seedable, portable 64-bit pseudo-random generator (splitmix64).

Scenario generation uses one sub-stream per placement decision, derived from
the instance seed and the decision index, so adding a decision never perturbs
earlier ones and results are identical across platforms and Python versions.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """The splitmix64 generator; state advances by the golden-gamma constant."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _MASK - (_MASK + 1) % n
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def shuffled(self, seq) -> list:
        """Fisher-Yates shuffle of a copy of ``seq``."""
        out = list(seq)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def substream(seed: int, decision_index: int) -> SplitMix64:
    """Independent generator for the ``decision_index``-th placement decision."""
    return SplitMix64(_mix((seed ^ (decision_index * _GOLDEN)) & _MASK))
