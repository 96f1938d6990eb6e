"""Segmented sieve for exact divisor counts tau(n) over integer ranges.

This is the throughput kernel: everything else (orbit walks, moment sums,
progression sampling) pulls its tau values from here.  Two sieve paths are
kept:

* ``pairs`` (default): only divisors d <= sqrt(hi) are enumerated; each
  multiple m of d with d*d < m gets +2 (the divisor pair d, m/d) and each
  perfect square d*d gets +1.  Per block of size B the work is
  sum_{d<=sqrt(hi)} B/d, done as numpy strided adds.
* ``plain``: every divisor d < hi stamps +1 at its multiples.  Slower by a
  large factor but independent of the pairing argument; kept as the
  cross-check path.

Blocks are pure functions of their range, immutable once built, and safe to
produce from any number of workers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

log = logging.getLogger("orbitlab.sieve")

# Default entries per block; uint16 counts keep a block in cache-friendly
# territory.  tau(n) < 2**16 holds far beyond any range this tool targets
# (max tau below 1e10 is 6720).
DEFAULT_BLOCK_SIZE = 1 << 22

# Progress line to stderr every this many sieved integers (see cli).
PROGRESS_EVERY = 10**8


@dataclass(frozen=True)
class TauBlock:
    """Divisor counts for the half-open range [lo, hi)."""

    lo: int
    hi: int
    counts: np.ndarray  # uint16, counts[i] == tau(lo + i)

    def __post_init__(self):
        self.counts.setflags(write=False)

    def __len__(self) -> int:
        return self.hi - self.lo

    def tau(self, n: int) -> int:
        if not self.lo <= n < self.hi:
            raise IndexError(f"{n} outside block [{self.lo}, {self.hi})")
        return int(self.counts[n - self.lo])


def sieve_block(lo: int, hi: int, method: str = "pairs",
                block_size: int = DEFAULT_BLOCK_SIZE) -> TauBlock:
    """Sieve exact tau(n) for all n in [lo, hi).

    Deterministic and boundary-independent: sieving [a,b) then [b,c) agrees
    elementwise with sieving [a,c).
    """
    if lo < 1 or hi <= lo:
        raise ValueError(f"need 1 <= lo < hi, got lo={lo}, hi={hi}")
    if hi - lo > block_size:
        raise ValueError(f"range length {hi - lo} exceeds block size {block_size}")
    if method == "pairs":
        counts = _sieve_pairs(lo, hi)
    elif method == "plain":
        counts = _sieve_plain(lo, hi)
    else:
        raise ValueError(f"unknown sieve method {method!r}")
    return TauBlock(lo, hi, counts)


def _sieve_pairs(lo: int, hi: int) -> np.ndarray:
    counts = np.zeros(hi - lo, dtype=np.uint16)
    for d in range(1, math.isqrt(hi - 1) + 1):
        sq = d * d
        # multiples m of d with m > d*d contribute the pair (d, m/d)
        start = max(lo, sq + d)
        first = -(-start // d) * d
        if first < hi:
            counts[first - lo::d] += 2
        if lo <= sq < hi:
            counts[sq - lo] += 1
    return counts


def _sieve_plain(lo: int, hi: int) -> np.ndarray:
    counts = np.zeros(hi - lo, dtype=np.uint16)
    for d in range(1, hi):
        first = -(-lo // d) * d
        if first < hi:
            counts[first - lo::d] += 1
    return counts


def iter_blocks(lo: int, hi: int, block_size: int = DEFAULT_BLOCK_SIZE,
                descending: bool = False, method: str = "pairs") -> Iterator[TauBlock]:
    """Stream TauBlocks covering [lo, hi) in order."""
    if lo < 1 or hi <= lo:
        raise ValueError(f"need 1 <= lo < hi, got lo={lo}, hi={hi}")
    if descending:
        b_hi = hi
        while b_hi > lo:
            b_lo = max(lo, b_hi - block_size)
            yield sieve_block(b_lo, b_hi, method=method, block_size=block_size)
            b_hi = b_lo
    else:
        b_lo = lo
        while b_lo < hi:
            b_hi = min(hi, b_lo + block_size)
            yield sieve_block(b_lo, b_hi, method=method, block_size=block_size)
            b_lo = b_hi


def tau_range_array(lo: int, hi: int, block_size: int = DEFAULT_BLOCK_SIZE) -> np.ndarray:
    """tau(n) for n in [lo, hi) as one uint16 array (caller owns the memory)."""
    out = np.empty(hi - lo, dtype=np.uint16)
    for blk in iter_blocks(lo, hi, block_size):
        out[blk.lo - lo:blk.hi - lo] = blk.counts
    return out


def tau_range_max(lo: int, hi: int, block_size: int = DEFAULT_BLOCK_SIZE) -> int:
    """max tau(n) over [lo, hi), streamed."""
    best = 0
    for blk in iter_blocks(lo, hi, block_size):
        m = int(blk.counts.max())
        if m > best:
            best = m
    return best


# -- reference path -----------------------------------------------------------

_prime_cache: list[int] = [2, 3, 5, 7]
_prime_cache_limit = 10


def _primes_upto(limit: int) -> list[int]:
    """Cached prime list by plain Eratosthenes, grown on demand."""
    global _prime_cache, _prime_cache_limit
    if limit > _prime_cache_limit:
        new_limit = max(limit, 2 * _prime_cache_limit)
        flags = np.ones(new_limit + 1, dtype=bool)
        flags[:2] = False
        for p in range(2, math.isqrt(new_limit) + 1):
            if flags[p]:
                flags[p * p::p] = False
        _prime_cache = [int(p) for p in np.flatnonzero(flags)]
        _prime_cache_limit = new_limit
    return _prime_cache


def divisor_count(n: int) -> int:
    """tau(n) by trial division over primes up to sqrt(n).

    Reference path; the oracle the segmented sieve is tested against.
    """
    if n < 1:
        raise ValueError(f"divisor_count needs n >= 1, got {n}")
    if n == 1:
        return 1
    result = 1
    root = math.isqrt(n)
    for p in _primes_upto(root):
        if p > root:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            result *= e + 1
            root = math.isqrt(n)
    if n > 1:
        result *= 2  # leftover prime factor
    return result


# -- moment sums --------------------------------------------------------------

def tau_moment_sum(x: int, power: int = 1, block_size: int = DEFAULT_BLOCK_SIZE) -> int:
    """Exact sum of tau(n)**power over 1 <= n <= x, streamed blockwise."""
    if x < 1:
        raise ValueError(f"tau_moment_sum needs x >= 1, got {x}")
    return tau_moment_range(1, x + 1, power, block_size)


def tau_moment_range(lo: int, hi: int, power: int = 1,
                     block_size: int = DEFAULT_BLOCK_SIZE) -> int:
    """Exact sum of tau(n)**power over lo <= n < hi."""
    if power not in (1, 2):
        raise ValueError(f"power must be 1 or 2, got {power}")
    total = 0
    done = 0
    for blk in iter_blocks(lo, hi, block_size):
        c = blk.counts.astype(np.int64)
        if power == 2:
            c = c * c
        total += int(c.sum())
        done += len(blk)
        if done % PROGRESS_EVERY < len(blk) and done >= PROGRESS_EVERY:
            log.info("moment sum: %d / %d sieved", done, hi - lo)
    return total
