"""Concentration experiments: how much of the divisor-sum energy can pile up
at a single level.

Two probes:

* random near-arithmetic model progressions m_i = a - i*T inside (N, 2N],
  scoring the share of energy within a relative band around T, and
* the orbit itself, scoring per dyadic crossing the largest energy fraction
  any single level (or dyadic band of levels) carries.

Sampled runs are reproducible: the generator is the documented SplitMix64,
each sample gets the stream (seed + sample_index), and identical parameters
give byte-identical reports at any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .orbit import NoCrossingError, OrbitSummary, RunOptions, run_orbit, \
    segment_from_summary
from .rng import sample_stream
from .segments import segment_arrays
from .sieve import divisor_count, tau_range_array

# Below this many touched points per run, tau comes from per-point trial
# division; above it, from one sieve of the covering range.
SIEVE_CROSSOVER = 10**5


def concentration_ratio(tau_values, level: int, eps: float) -> float:
    """Share of total energy carried by values with |tau - level| <= eps*level.

    Band membership is decided exactly (eps taken at its binary float value).
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    taus = np.asarray(tau_values, dtype=np.int64)
    if taus.size == 0:
        raise ValueError("empty value list")
    total = int(taus.sum())
    # integer |tau - T| <= eps*T  <=>  |tau - T| <= floor(eps*T), eps exact
    band = Fraction(eps) * level
    limit = band.numerator // band.denominator
    in_band = np.abs(taus - level) <= limit
    return int(taus[in_band].sum()) / total


@dataclass(frozen=True)
class ProgressionSample:
    index: int
    scale: int
    level: int            # step T
    start: int            # a; points are a - i*T
    length: int           # r
    tau_values: np.ndarray
    ratios: dict          # eps -> R_eps


@dataclass(frozen=True)
class ProgressionReport:
    scale: int
    level: int
    count: int
    length: int
    seed: int
    samples: tuple        # ProgressionSample, in index order
    max_ratios: dict      # eps -> max over samples


def default_level(scale: int) -> int:
    """T = round(ln N), half to even."""
    return round(math.log(scale))


def sample_progressions(scale: int, level: Optional[int] = None, count: int = 500,
                        eps_list: Sequence[float] = (0.1, 0.2, 0.3),
                        seed: int = 42, r_factor: float = 0.9,
                        tau_window: Optional[np.ndarray] = None) -> ProgressionReport:
    """Draw random decreasing progressions of step `level` inside (N, 2N] and
    record their band-concentration ratios.

    Start values are uniform on [N + r*T + 1, 2N] (so the whole progression
    stays inside the interval), with r = floor(r_factor * N / T).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if level is None:
        level = default_level(scale)
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    r = int(r_factor * scale) // level
    if r < 1:
        raise ValueError(f"progression length 0 at scale={scale}, level={level}")
    if r * level > scale:
        raise ValueError(
            f"progression span r*T = {r * level} exceeds the scale {scale}")
    lo_start = scale + r * level + 1
    hi_start = 2 * scale
    if lo_start > hi_start:
        raise ValueError("no room to place the progression inside (N, 2N]")

    touched = count * r
    if tau_window is None and touched >= SIEVE_CROSSOVER:
        tau_window = tau_range_array(scale + 1, 2 * scale + 1)

    offsets = level * np.arange(r, dtype=np.int64)
    samples = []
    maxima = {eps: 0.0 for eps in eps_list}
    for i in range(count):
        rng = sample_stream(seed, i)
        a = rng.uniform_int(lo_start, hi_start)
        points = a - offsets
        if tau_window is not None:
            taus = tau_window[points - (scale + 1)].astype(np.int64)
        else:
            taus = np.array([divisor_count(int(m)) for m in points],
                            dtype=np.int64)
        ratios = {eps: concentration_ratio(taus, level, eps) for eps in eps_list}
        for eps, val in ratios.items():
            if val > maxima[eps]:
                maxima[eps] = val
        samples.append(ProgressionSample(index=i, scale=scale, level=level,
                                         start=int(a), length=r,
                                         tau_values=taus, ratios=ratios))
    return ProgressionReport(scale=scale, level=level, count=count, length=r,
                             seed=seed, samples=tuple(samples),
                             max_ratios=maxima)


def level_sweep(scale: int, count: int = 500,
                eps_list: Sequence[float] = (0.1, 0.2, 0.3), seed: int = 42,
                r_factor: float = 0.9, half_width: int = 3) -> list:
    """Repeat sample_progressions for every integer level in
    [ln N - half_width, ln N + half_width]."""
    lo = math.ceil(math.log(scale) - half_width)
    hi = math.floor(math.log(scale) + half_width)
    tau_window = tau_range_array(scale + 1, 2 * scale + 1)
    return [sample_progressions(scale, level=t, count=count, eps_list=eps_list,
                                seed=seed, r_factor=r_factor,
                                tau_window=tau_window)
            for t in range(max(1, lo), hi + 1)]


@dataclass(frozen=True)
class TauHistogram:
    """Energy-weighted histogram of tau over progression samples, averaged
    across samples; each sample is normalized to total energy 1 first."""

    bin_width: int
    bins: np.ndarray      # left edges, ascending
    weights: np.ndarray   # mean energy fraction per bin

    @property
    def modal_mass(self) -> float:
        return float(self.weights.max())


def tau_histogram(samples: Sequence[ProgressionSample], bin_width: int = 1) -> TauHistogram:
    if bin_width < 1:
        raise ValueError(f"bin_width must be >= 1, got {bin_width}")
    if not samples:
        raise ValueError("no samples")
    top = max(int(s.tau_values.max()) for s in samples)
    nbins = top // bin_width + 1
    acc = np.zeros(nbins, dtype=np.float64)
    for s in samples:
        t = s.tau_values
        idx = t // bin_width
        energy = np.bincount(idx, weights=t.astype(np.float64), minlength=nbins)
        acc += energy / t.sum()
    weights = acc / len(samples)
    bins = np.arange(nbins, dtype=np.int64) * bin_width
    return TauHistogram(bin_width=bin_width, bins=bins, weights=weights)


@dataclass(frozen=True)
class ConcentrationScan:
    """Per-level energies of one dyadic crossing and the largest fraction of
    the scale budget N any single level carries."""

    scale: int
    steps: int
    energy: int
    band_mode: str          # "exact-level" or "dyadic-band"
    levels: dict            # level (or band exponent) -> energy
    max_frac: float         # max level energy / N
    argmax: int
    max_frac_smoothed: Optional[float]  # +-1 level smoothing, exact mode only


def orbit_scale_concentration(x: int, scale: int, band_mode: str = "exact-level",
                              summary: Optional[OrbitSummary] = None) -> ConcentrationScan:
    """How concentrated on a single divisor level the crossing of
    (scale, 2*scale] is, normalized by the scale's energy budget N."""
    if band_mode not in ("exact-level", "dyadic-band"):
        raise ValueError(f"unknown band_mode {band_mode!r}")
    if summary is not None:
        values, taus = segment_from_summary(summary, scale)
    else:
        from .orbit import orbit_segment
        values, taus = segment_arrays(orbit_segment(x, scale))
    if len(values) == 0:
        raise NoCrossingError(f"orbit of {x} jumped over ({scale}, {2 * scale}]")
    return scan_segment((values, taus), scale, band_mode)


def scan_segment(segment, scale: int, band_mode: str = "exact-level") -> ConcentrationScan:
    values, taus = segment_arrays(segment)
    energy = int(taus.sum())
    if band_mode == "dyadic-band":
        groups, sums = _group_energy(np.int64(np.log2(taus)), taus)
        smoothed = None
    else:
        groups, sums = _group_energy(taus, taus)
        by_level = dict(zip(groups, sums))
        smoothed = max(by_level.get(t - 1, 0) + e + by_level.get(t + 1, 0)
                       for t, e in by_level.items()) / scale
    best = int(np.argmax(sums))
    return ConcentrationScan(
        scale=scale,
        steps=len(values),
        energy=energy,
        band_mode=band_mode,
        levels={int(g): int(s) for g, s in zip(groups, sums)},
        max_frac=int(sums[best]) / scale,
        argmax=int(groups[best]),
        max_frac_smoothed=smoothed,
    )


def _group_energy(keys: np.ndarray, taus: np.ndarray):
    groups, inverse = np.unique(keys, return_inverse=True)
    sums = np.zeros(len(groups), dtype=np.int64)
    np.add.at(sums, inverse, taus)
    return groups, sums


def energy_by_dyadic_tau_range(segment):
    """Partition segment energy by the dyadic range 2^k <= tau < 2^(k+1).

    Returns (mapping k -> energy, argmax k).  The largest part always carries
    at least total/len(mapping) by pigeonhole.
    """
    _, taus = segment_arrays(segment)
    if len(taus) == 0:
        raise ValueError("empty segment")
    groups, sums = _group_energy(np.int64(np.log2(taus)), taus)
    mapping = {int(g): int(s) for g, s in zip(groups, sums)}
    argmax = int(groups[int(np.argmax(sums))])
    return mapping, argmax
