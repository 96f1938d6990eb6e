"""Diagnostics for the distribution of the orbit on a dyadic scale: residue
distributions, divisor-membership discrepancy, exponential-phase bias and
increments, residue concentration of the step sizes, variance/regular sets,
and detection of near-arithmetic runs with near-constant step.

Asymptotically-small quantities are reported as normalized ratios
(discrepancy / (V ln N), saturation fractions), never asserted to vanish:
finite data cannot witness a limit.  All phases are computed from residues
reduced in integer arithmetic first, so results are exact up to final
rounding even for huge orbit values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .segments import segment_arrays

TWO_PI = 2.0 * math.pi


def default_moduli(max_q: int = 64, prime_limit: int = 101) -> list:
    """Moduli grid for scans: all q up to max_q plus all primes up to
    prime_limit."""
    qs = set(range(2, max_q + 1))
    for p in range(2, prime_limit + 1):
        if all(p % d for d in range(2, int(math.isqrt(p)) + 1)):
            qs.add(p)
    return sorted(qs)


def _require_nonempty(values) -> int:
    if len(values) == 0:
        raise ValueError("empty segment")
    return len(values)


def residue_distribution(segment, q: int) -> dict:
    """Exact empirical distribution of the segment values modulo q, as
    Fractions with denominator V."""
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    values, _ = segment_arrays(segment)
    count = _require_nonempty(values)
    hits = np.bincount(values % q, minlength=q)
    return {a: Fraction(int(hits[a]), count) for a in range(q)}


def divisor_discrepancy(segment, scale: int, detail: bool = False):
    """Summed divisor-membership discrepancy over d <= sqrt(2*scale):
        sum_d | #{j : d | n_j} - V/d |
    plus its normalization by V * ln(scale).

    Returns (discrepancy, discrepancy_norm) or, with detail=True,
    (discrepancy, discrepancy_norm, [(d, count, term), ...]).
    Counting is exact; the sum is accumulated as rationals.
    """
    if scale < 2:
        raise ValueError(f"scale must be >= 2, got {scale}")
    values, _ = segment_arrays(segment)
    count = _require_nonempty(values)
    dmax = math.isqrt(2 * scale)
    in_window = len(values) > 0 and values.min() > scale and values.max() <= 2 * scale
    if in_window:
        # per-d stepping over a presence bitmap of (scale, 2*scale]
        present = np.zeros(scale, dtype=bool)
        present[values - scale - 1] = True
        counts_by_d = []
        for d in range(1, dmax + 1):
            first = (scale // d + 1) * d
            counts_by_d.append(int(present[first - scale - 1::d].sum()))
    else:
        counts_by_d = [int((values % d == 0).sum()) for d in range(1, dmax + 1)]
    total = Fraction(0)
    rows = []
    for d, c in zip(range(1, dmax + 1), counts_by_d):
        term = Fraction(abs(c * d - count), d)
        total += term
        if detail:
            rows.append((d, c, float(term)))
    disc = float(total)
    norm = disc / (count * math.log(scale))
    if detail:
        return disc, norm, rows
    return disc, norm


def _unit_phases(residues: np.ndarray, q: int) -> np.ndarray:
    return np.exp((TWO_PI / q * 1j) * residues)


def fourier_bias(segment, q: int, h: int) -> float:
    """| (1/V) sum_j e(h n_j / q) | with e(t) = exp(2 pi i t).

    Phases are reduced mod q in integers before any float enters, and the
    residue-class counts are summed with compensated summation.
    """
    if q < 2:
        raise ValueError(f"modulus must be >= 2, got {q}")
    values, _ = segment_arrays(segment)
    count = _require_nonempty(values)
    hits = np.bincount(values % q, minlength=q)
    re = math.fsum(int(c) * math.cos(TWO_PI * (h * a % q) / q)
                   for a, c in enumerate(hits) if c)
    im = math.fsum(int(c) * math.sin(TWO_PI * (h * a % q) / q)
                   for a, c in enumerate(hits) if c)
    return math.hypot(re, im) / count


def phase_increment_msq(segment, q: int, h: int) -> float:
    """(1/V) sum_j |e(-h tau(n_j)/q) - 1|^2, in [0, 4].

    Zero iff every step is divisible by q/gcd(h, q).
    """
    if q < 2:
        raise ValueError(f"modulus must be >= 2, got {q}")
    if h % q == 0:
        raise ValueError("h must be nonzero mod q")
    _, taus = segment_arrays(segment)
    count = _require_nonempty(taus)
    hits = np.bincount(taus % q, minlength=q)
    # |e(t) - 1|^2 = 2 - 2 cos(2 pi t); the sign of h does not matter
    total = math.fsum(int(c) * (2.0 - 2.0 * math.cos(TWO_PI * (h * r % q) / q))
                      for r, c in enumerate(hits) if c)
    return total / count


def phase_identity_max_gap(segment, q: int, h: int) -> float:
    """Max over j of | |e(h n_{j+1}/q) - e(h n_j/q)| - |e(-h tau(n_j)/q) - 1| |.

    The two sides agree exactly because n_{j+1} = n_j - tau(n_j); this
    measures only floating-point residue.
    """
    if q < 2:
        raise ValueError(f"modulus must be >= 2, got {q}")
    values, taus = segment_arrays(segment)
    _require_nonempty(values)
    nxt = values - taus
    z_now = _unit_phases(values % q * h % q, q)
    z_next = _unit_phases(nxt % q * h % q, q)
    u = _unit_phases((-h) * taus % q, q)
    lhs = np.abs(z_next - z_now)
    rhs = np.abs(u - 1.0)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class ResidueConcentration:
    modulus: int            # q / gcd(h, q)
    fraction: Fraction      # share of steps divisible by modulus
    concentrated: Optional[bool]  # fraction >= threshold, when one was given


def residue_concentration(segment, q: int, h: int,
                          threshold: Optional[float] = None) -> ResidueConcentration:
    """Share of steps tau(n_j) divisible by q/gcd(h, q): the exact finite
    companion of the phase-to-residue implication."""
    if q < 2:
        raise ValueError(f"modulus must be >= 2, got {q}")
    _, taus = segment_arrays(segment)
    count = _require_nonempty(taus)
    qp = q // math.gcd(h, q)
    frac = Fraction(int((taus % qp == 0).sum()), count)
    concentrated = None if threshold is None else frac >= Fraction(threshold)
    return ResidueConcentration(modulus=qp, fraction=frac, concentrated=concentrated)


@dataclass(frozen=True)
class CrtLevel:
    modulus: int            # product of the input moduli
    residue: int            # combined class in [0, modulus)
    level: Optional[int]    # the unique candidate in [1, bound], if unique
    candidates: int         # how many integers of [1, bound] fit the class


def crt_level(classes: Sequence, bound: int) -> CrtLevel:
    """Combine residue classes (residue, modulus) over pairwise coprime moduli
    and report which integers in [1, bound] satisfy all of them.

    When the combined modulus exceeds bound there is at most one candidate;
    otherwise the ambiguity count is reported.
    """
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    if not classes:
        raise ValueError("need at least one residue class")
    mods = [m for _, m in classes]
    for i in range(len(mods)):
        if mods[i] < 1:
            raise ValueError(f"modulus must be >= 1, got {mods[i]}")
        for k in range(i + 1, len(mods)):
            if math.gcd(mods[i], mods[k]) != 1:
                raise ValueError(
                    f"moduli {mods[i]} and {mods[k]} are not coprime")
    residue, modulus = 0, 1
    for r, m in classes:
        # standard CRT merge
        g, p, _ = _ext_gcd(modulus, m)
        diff = (r - residue) % m
        residue = residue + modulus * (diff * p % m)
        modulus *= m
        residue %= modulus
    first = residue if residue >= 1 else modulus
    candidates = 0 if first > bound else (bound - first) // modulus + 1
    level = first if candidates == 1 else None
    return CrtLevel(modulus=modulus, residue=residue, level=level,
                    candidates=candidates)


def _ext_gcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    return old_r, old_s, old_t


@dataclass(frozen=True)
class RegularSet:
    """Indices whose step size sits within eta of the segment-mean level."""

    level: Fraction          # mean of tau over the segment
    eta: Fraction            # tolerance, exact binary value of the input
    members: tuple           # segment indices
    member_energy: int
    total_energy: int
    saturation: float        # member_energy / total_energy

    @property
    def saturation_exact(self) -> Fraction:
        return Fraction(self.member_energy, self.total_energy)


def variance_and_regular_set(segment, eta: float):
    """Segment-mean level T, population variance of tau, and the regular set
    {j : |tau(n_j) - T| <= eta*T} with its exact energy share.

    Membership is decided in exact rational arithmetic: |tau*V - E| <= eta*E.
    """
    if not 0 < eta < 1:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    _, taus = segment_arrays(segment)
    count = _require_nonempty(taus)
    tlist = taus.tolist()
    energy = sum(tlist)
    sq = sum(t * t for t in tlist)
    mean = Fraction(energy, count)
    var = Fraction(sq, count) - mean * mean
    eta_f = Fraction(eta)
    # integer |tau*V - E| <= eta*E  <=>  |tau*V - E| <= floor(eta*E)
    bound = eta_f * energy
    limit = bound.numerator // bound.denominator
    members = tuple(i for i, t in enumerate(tlist)
                    if abs(t * count - energy) <= limit)
    member_energy = sum(tlist[i] for i in members)
    reg = RegularSet(level=mean, eta=eta_f, members=members,
                     member_energy=member_energy, total_energy=energy,
                     saturation=member_energy / energy)
    return float(mean), float(var), reg


@dataclass(frozen=True)
class LadderRun:
    """Maximal stretch of consecutive orbit points with near-constant step
    equal (within tolerance) to the near-constant divisor count."""

    start: int              # segment index of the first value
    values: tuple           # r decreasing orbit values
    level: int              # rounded mean of the r-1 stepping tau values
    step_tol: float
    level_tol: float
    violations: int         # checks failing either condition at this level

    @property
    def length(self) -> int:
        return len(self.values)


def detect_ladders(segment, step_tol: float, level_tol: float,
                   min_len: int = 3, max_violation_frac: float = 0.1) -> list:
    """Greedy scan for maximal runs of consecutive points where both
        |(m_i - m_{i+1}) - T| <= step_tol * T   and
        |tau(m_i) - T|       <= level_tol * T
    hold, with T the run mean of the stepping tau values rounded half-even,
    allowing up to max_violation_frac of the checks to fail.
    """
    for name, tol in (("step_tol", step_tol), ("level_tol", level_tol)):
        if not 0 < tol < 1:
            raise ValueError(f"{name} must be in (0, 1), got {tol}")
    if min_len < 3:
        raise ValueError(f"min_len must be >= 3, got {min_len}")
    values, taus = segment_arrays(segment)
    v = values.tolist()
    t = taus.tolist()
    total = len(v)
    runs = []
    s = 0
    while s < total - 1:
        e = s  # last value index of the current window
        tau_sum = 0
        level = 0
        viol = 0
        best_e = None
        best = None
        while e + 1 < total:
            # extend window by the value at e+1; new check index is e
            tau_sum += t[e]
            e += 1
            new_level = round(Fraction(tau_sum, e - s))
            if new_level != level:
                level = new_level
                viol = sum(1 for i in range(s, e)
                           if _ladder_violation(v, t, i, level, step_tol, level_tol))
            else:
                viol += _ladder_violation(v, t, e - 1, level, step_tol, level_tol)
            if level >= 1 and viol <= int(max_violation_frac * (e - s)):
                best_e, best = e, (level, viol)
            else:
                break
        if best_e is None:
            s += 1
            continue
        length = best_e - s + 1
        if length >= min_len:
            runs.append(LadderRun(
                start=s,
                values=tuple(v[s:best_e + 1]),
                level=best[0],
                step_tol=step_tol,
                level_tol=level_tol,
                violations=best[1],
            ))
        s = best_e + 1
    return runs


def _ladder_violation(v, t, i, level, step_tol, level_tol) -> bool:
    step = v[i] - v[i + 1]
    return abs(step - level) > step_tol * level \
        or abs(t[i] - level) > level_tol * level


@dataclass(frozen=True)
class MixingReport:
    """Scan of one dyadic crossing over a grid of moduli."""

    scale: int
    steps: int
    discrepancy: float
    discrepancy_norm: float
    residue: dict           # q -> {a -> Fraction}
    bias: dict              # (q, h) -> float, h in 1..q-1
    phase_msq: dict         # (q, h) -> float
    residue_conc: dict      # (q, h) -> Fraction


def mixing_report(segment, scale: int, moduli: Optional[Sequence] = None) -> MixingReport:
    values, taus = segment_arrays(segment)
    count = _require_nonempty(values)
    if moduli is None:
        moduli = default_moduli()
    disc, norm = divisor_discrepancy(segment, scale)
    residue = {}
    bias = {}
    msq = {}
    conc = {}
    seg = (values, taus)
    for q in moduli:
        residue[q] = residue_distribution(seg, q)
        for h in range(1, q):
            bias[(q, h)] = fourier_bias(seg, q, h)
            msq[(q, h)] = phase_increment_msq(seg, q, h)
            conc[(q, h)] = residue_concentration(seg, q, h).fraction
    return MixingReport(scale=scale, steps=count, discrepancy=disc,
                        discrepancy_norm=norm, residue=residue, bias=bias,
                        phase_msq=msq, residue_conc=conc)
