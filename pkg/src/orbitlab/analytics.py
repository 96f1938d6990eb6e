"""Normalized comparisons and tail reductions for orbit output.

Conventions (pinned by matching the reference ratio table at x >= 1e4):
all logs are natural, and the logarithmic-integral column uses the
principal-value integral from 0, not the offset integral from 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .sieve import tau_moment_range
from .segments import segment_arrays

EULER_GAMMA = 0.5772156649015329


def log_integral(x: float) -> float:
    """Principal-value li(x) = PV int_0^x dt/ln t for x >= 2.

    Evaluated by the rapidly convergent series
        li(x) = gamma + ln ln x
              + sqrt(x) * sum_{n>=1} (-1)^(n-1) (ln x)^n / (n! 2^(n-1))
                          * sum_{0<=k<=(n-1)/2} 1/(2k+1),
    summed with exact compensation (math.fsum).  Relative error is at the
    few-ulp level over [2, 1e9], far inside the 1e-10 contract.
    """
    if x < 2:
        raise ValueError(f"log_integral needs x >= 2, got {x}")
    u = math.log(x)
    terms = []
    factor = 1.0  # u^n / n!
    inner = 0.0   # sum of 1/(2k+1) for 2k+1 <= ...
    k_done = -1
    n = 0
    while True:
        n += 1
        factor *= u / n
        kmax = (n - 1) // 2
        while k_done < kmax:
            k_done += 1
            inner += 1.0 / (2 * k_done + 1)
        t = factor / (1 << (n - 1)) * inner
        terms.append(t if n % 2 == 1 else -t)
        if n > u and abs(t) < 1e-18 * max(1.0, abs(sum(terms[-3:]))):
            break
        if n > 500:
            break
    return EULER_GAMMA + math.log(u) + math.sqrt(x) * math.fsum(terms)


@dataclass(frozen=True)
class RatioRow:
    """Orbit length normalized by the three heuristic comparators."""

    x: int
    a_x: int
    r_logx: float     # a_x / (x / ln x)
    r_loglog: float   # a_x / (x / (ln x + ln ln x))
    r_li: float       # a_x / li(x)

    def rounded(self, digits: int = 4) -> tuple:
        return (self.x, self.a_x,
                round_half_even(self.r_logx, digits),
                round_half_even(self.r_loglog, digits),
                round_half_even(self.r_li, digits))


def round_half_even(v: float, digits: int) -> float:
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(v)).quantize(q, rounding=ROUND_HALF_EVEN))


def ratio_table(rows: Sequence[tuple]) -> list:
    """RatioRows for (x, a_x) pairs.  Full precision; rounding is display-only.

    Note: for x < 1e4 the li column disagrees with the reference table's
    printed values, which do not match any standard li normalization at small
    x; the recomputed values are emitted regardless.
    """
    out = []
    for x, a_x in rows:
        if x < 10:
            raise ValueError(f"ratio_table needs x >= 10, got {x}")
        lx = math.log(x)
        out.append(RatioRow(
            x=x,
            a_x=a_x,
            r_logx=a_x / (x / lx),
            r_loglog=a_x / (x / (lx + math.log(lx))),
            r_li=a_x / log_integral(x),
        ))
    return out


@dataclass(frozen=True)
class TailReport:
    """Energy of the crossing carried by tau values above (ln N)^exponent,
    against the unconditional majorant sum tau^2 / cutoff over (N/2, 4N]."""

    scale: int
    exponent: float
    cutoff: float
    tail_energy: int
    tau_sq_window: int     # sum of tau(n)^2 over (scale/2, 4*scale]
    bound: float           # tau_sq_window / cutoff; inf when cutoff == 0

    @property
    def holds(self) -> bool:
        # tail_energy <= tau_sq_window / cutoff, checked in integers
        if self.cutoff <= 0:
            return True
        return Fraction(self.tail_energy) * Fraction(self.cutoff) \
            <= self.tau_sq_window


def tail_cutoff(scale: int, exponent: float) -> float:
    return math.log(scale) ** exponent


def tail_energy(segment, scale: int, exponent: float,
                tau_sq_window: Optional[int] = None) -> TailReport:
    """Tail report for a crossing of (scale, 2*scale].

    exponent > 3 is the regime of interest; any positive value is accepted
    for exploration.  tau_sq_window may be passed in when the caller already
    sieved the window.
    """
    if exponent <= 0:
        raise ValueError(f"exponent must be positive, got {exponent}")
    values, taus = segment_arrays(segment)
    cutoff = tail_cutoff(scale, exponent)
    tail = int(taus[taus > cutoff].sum())
    if tau_sq_window is None:
        tau_sq_window = tau_moment_range(scale // 2 + 1, 4 * scale + 1, power=2)
    bound = tau_sq_window / cutoff if cutoff > 0 else math.inf
    return TailReport(scale=scale, exponent=exponent, cutoff=cutoff,
                      tail_energy=tail, tau_sq_window=tau_sq_window, bound=bound)


@dataclass(frozen=True)
class BoundedRestriction:
    """Partition of a segment at the cutoff (ln N)^exponent."""

    cutoff: float
    kept: list              # (n, tau) with tau <= cutoff
    kept_energy: int
    discarded_energy: int


def bounded_restrict(segment, scale: int, exponent: float) -> BoundedRestriction:
    """Split a crossing into the bounded-tau part and the discarded rest.

    The two energies sum to the segment energy exactly.
    """
    values, taus = segment_arrays(segment)
    cutoff = tail_cutoff(scale, exponent)
    keep = taus <= cutoff
    kept_energy = int(taus[keep].sum())
    total = int(taus.sum())
    kept = [(int(n), int(t)) for n, t in zip(values[keep], taus[keep])]
    return BoundedRestriction(cutoff=cutoff, kept=kept, kept_energy=kept_energy,
                              discarded_energy=total - kept_energy)
