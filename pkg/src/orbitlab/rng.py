"""SplitMix64: the named, portable 64-bit generator behind every sampled
experiment.

The algorithm is the public-domain reference one (golden-gamma increment,
two xor-multiply mixes); given the same seed it yields the same stream in
any implementation, which is what makes sampled tables reproducible across
machines and languages.  Integer draws use plain modulo reduction; the
modulo bias is irrelevant at the ranges involved and keeping the draw rule
trivial is part of the portability contract.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform_int(self, lo: int, hi: int) -> int:
        """Uniform draw from [lo, hi] via lo + next_u64() % span."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)


def sample_stream(master_seed: int, index: int) -> SplitMix64:
    """Per-sample generator: seeded with master_seed + index, so samples are
    independent of evaluation order and can fan out across workers."""
    return SplitMix64((master_seed + index) & _MASK)
