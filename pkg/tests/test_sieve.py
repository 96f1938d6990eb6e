import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitlab.sieve import (divisor_count, iter_blocks, sieve_block,
                            tau_moment_range, tau_moment_sum, tau_range_array)

EULER_GAMMA = 0.5772156649015329


def tau_brute(n):
    """Divisor enumeration, the dumbest possible oracle."""
    return sum(1 for d in range(1, n + 1) if n % d == 0)


def divisor_summatory(x):
    """sum_{n<=x} tau(n) by the floor-sum identity; independent of any sieve."""
    r = math.isqrt(x)
    return 2 * sum(x // d for d in range(1, r + 1)) - r * r


def test_single_values():
    assert sieve_block(1, 2).counts.tolist() == [1]
    assert sieve_block(10, 13).counts.tolist() == [4, 2, 6]
    assert sieve_block(100, 101).counts.tolist() == [9]


def test_first_hundred_against_brute():
    counts = sieve_block(1, 101).counts
    for n in range(1, 101):
        assert counts[n - 1] == tau_brute(n), n


def test_tau_one_only_at_one(tau_upto_1e5):
    assert tau_upto_1e5[0] == 1
    assert (tau_upto_1e5[1:] >= 2).all()


def test_tau_two_exactly_at_primes(tau_upto_1e5):
    flags = np.ones(10**5 + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(10**5) + 1):
        if flags[p]:
            flags[p * p::p] = False
    primes = set(np.flatnonzero(flags).tolist())
    twos = set((np.flatnonzero(tau_upto_1e5 == 2) + 1).tolist())
    assert twos == primes


@given(a=st.integers(2, 300), b=st.integers(2, 300))
def test_multiplicative_on_coprime_pairs(a, b):
    if math.gcd(a, b) != 1:
        return
    assert divisor_count(a * b) == divisor_count(a) * divisor_count(b)


def test_divisor_count_examples():
    assert divisor_count(1) == 1
    assert divisor_count(12) == 6
    assert divisor_count(2**10) == 11


def test_divisor_count_rejects_nonpositive():
    with pytest.raises(ValueError):
        divisor_count(0)
    with pytest.raises(ValueError):
        divisor_count(-3)


def test_sieve_block_rejects_bad_ranges():
    with pytest.raises(ValueError):
        sieve_block(0, 5)
    with pytest.raises(ValueError):
        sieve_block(5, 5)
    with pytest.raises(ValueError):
        sieve_block(7, 3)
    with pytest.raises(ValueError):
        sieve_block(1, 100, block_size=10)


def test_block_boundary_independence():
    whole = sieve_block(1, 10**5).counts
    for size in (64, 1000, 2**16):
        parts = [blk.counts for blk in iter_blocks(1, 10**5, block_size=size)]
        assert np.array_equal(np.concatenate(parts), whole), size


def test_pairs_path_matches_plain_path():
    for lo, hi in ((1, 5000), (99991, 101000), (2**20 - 500, 2**20 + 500)):
        fast = sieve_block(lo, hi, method="pairs").counts
        plain = sieve_block(lo, hi, method="plain").counts
        assert np.array_equal(fast, plain), (lo, hi)


@settings(max_examples=40)
@given(lo=st.integers(1, 10**6), width=st.integers(1, 300))
def test_pairs_path_matches_brute_anywhere(lo, width):
    counts = sieve_block(lo, lo + width).counts
    for off in (0, width // 2, width - 1):
        n = lo + off
        assert counts[off] == divisor_count(n), n


def test_moment_sum_examples():
    assert tau_moment_sum(1, 1) == 1
    assert tau_moment_sum(10, 1) == 27


def test_moment_sum_pinned_at_1e6():
    # pinned from the floor-sum identity; also inside the average-order band
    assert tau_moment_sum(10**6, 1) == 13970034
    assert divisor_summatory(10**6) == 13970034


def test_moment_sum_matches_identity_oracle():
    for x in (17, 999, 10**4, 123456):
        assert tau_moment_sum(x, 1) == divisor_summatory(x), x


def test_second_moment_pinned():
    assert tau_moment_sum(1000, 2) == 75083  # brute divisor enumeration
    assert tau_moment_sum(1000, 2) == sum(tau_brute(n)**2 for n in range(1, 1001))


def test_moment_range_consistency():
    assert tau_moment_range(50, 120, 1) == \
        tau_moment_sum(119, 1) - tau_moment_sum(49, 1)


def test_average_order_band():
    for x in (10**4, 10**6):
        main = x * math.log(x) + (2 * EULER_GAMMA - 1) * x
        assert abs(tau_moment_sum(x, 1) - main) <= 10 * math.sqrt(x), x


def test_moment_sum_rejects_bad_args():
    with pytest.raises(ValueError):
        tau_moment_sum(0, 1)
    with pytest.raises(ValueError):
        tau_moment_sum(10, 3)


def test_tau_range_array_stitches_blocks():
    arr = tau_range_array(500, 2500, block_size=128)
    whole = sieve_block(500, 2500).counts
    assert np.array_equal(arr, whole)


def test_blocks_are_immutable():
    blk = sieve_block(1, 100)
    with pytest.raises(ValueError):
        blk.counts[0] = 5
