"""Walk the divisor-step recursion n -> n - tau(n).

A run from x is a single downward pass: descending tau blocks are pulled from
the sieve (optionally prefetched by worker threads) while one consumer thread
steps the recursion, accumulating the step count, the energy (sum of tau along
the orbit), and per-dyadic-scale statistics.

Dyadic bookkeeping rides on one chain of thresholds: the first index where the
orbit drops to or below 2**k is recorded once per k, and the crossing of the
scale (N, 2N] with N = 2**k is the index range between the snapshots for
2**(k+1) and 2**k.  Snapshots carry cumulative sums, so per-scale energy and
variance fall out by subtraction.

Runs are resumable: the walk state (current n, step index, cumulative sums,
threshold snapshots, per-scale tau maxima) fits in a small versioned binary
checkpoint, and a resumed run reproduces the uninterrupted summary bit for
bit at any block size or worker count.
"""

from __future__ import annotations

import dataclasses
import os
import struct
import zlib
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, NamedTuple, Optional

import numpy as np

from .sieve import DEFAULT_BLOCK_SIZE, divisor_count, sieve_block, tau_range_max

# Scales up to this get their window max tau from a dedicated exact sieve of
# (N/2, 4N]; above it the walk's own blocks (which cover [1, x]) supply the
# max over the intersection of the window with [1, x].
EXACT_DELTA_LIMIT = 10**6

DEFAULT_CHECKPOINT_EVERY = 1 << 26


class InvariantError(RuntimeError):
    """A hard arithmetic identity of the walk failed."""


class NoCrossingError(ValueError):
    """The orbit never enters the requested dyadic interval."""


class CheckpointError(RuntimeError):
    """Checkpoint file unreadable, corrupted, or version-mismatched."""


class OrbitInterrupted(RuntimeError):
    """Walk halted before completion; checkpoint holds the resumable state."""

    def __init__(self, checkpoint_path: Optional[Path]):
        super().__init__(f"orbit walk interrupted, state at {checkpoint_path}")
        self.checkpoint_path = checkpoint_path


@dataclass
class RunOptions:
    block_size: int = DEFAULT_BLOCK_SIZE
    keep_trace: bool = False
    checkpoint_path: Optional[str] = None
    checkpoint_every: int = DEFAULT_CHECKPOINT_EVERY
    # Test hook emulating a kill: once n <= stop_below, write a checkpoint and
    # raise OrbitInterrupted.  Requires checkpoint_path.
    stop_below: Optional[int] = None
    # Preloaded tau table covering [1, len]; table[i] == tau(i + 1).  Lets many
    # runs over the same range share one sieve pass.
    tau_table: Optional["TauTable"] = None
    exact_delta_limit: int = EXACT_DELTA_LIMIT
    threads: int = 1
    # Polled once per block; True => checkpoint (if configured) and interrupt.
    interrupt_check: Optional[Callable[[], bool]] = None


@dataclass(frozen=True)
class TauTable:
    """tau over [1, xmax] in both array form (vector ops) and list form
    (fast scalar stepping)."""

    xmax: int
    arr: np.ndarray
    lst: list

    @classmethod
    def build(cls, xmax: int, block_size: int = DEFAULT_BLOCK_SIZE) -> "TauTable":
        from .sieve import tau_range_array
        arr = tau_range_array(1, xmax + 1, block_size)
        return cls(xmax=xmax, arr=arr, lst=arr.tolist())

    def tau(self, n: int) -> int:
        return self.lst[n - 1]


class _Snap(NamedTuple):
    j: int
    n: int
    energy: int
    sq: int


@dataclass(frozen=True)
class DyadicRecord:
    """Statistics of one crossing of the interval (scale, 2*scale]."""

    scale: int
    enter_index: int        # first j with n_j <= 2*scale
    exit_index: int         # first j with n_j <= scale
    steps: int              # exit_index - enter_index; 0 means jumped over
    energy: int             # sum of tau over the crossing
    tau_sq_sum: int
    tau_mean: Optional[Fraction]
    tau_var: Optional[Fraction]
    window_tau_max: int     # max tau over (scale/2, 4*scale], see window_exact
    window_exact: bool      # True if the full window was sieved
    entered_from_above: bool  # False when the run starts inside the interval

    def to_dict(self) -> dict:
        return {
            "scale": _int_field(self.scale),
            "enter_index": _int_field(self.enter_index),
            "exit_index": _int_field(self.exit_index),
            "steps": _int_field(self.steps),
            "energy": _int_field(self.energy),
            "tau_sq_sum": _int_field(self.tau_sq_sum),
            "tau_mean": _frac_field(self.tau_mean),
            "tau_var": _frac_field(self.tau_var),
            "window_tau_max": self.window_tau_max,
            "window_exact": self.window_exact,
            "entered_from_above": self.entered_from_above,
        }


@dataclass(frozen=True)
class OrbitSummary:
    x: int
    a_x: int
    n_final: int            # value after the final step, 0 >= n_final > -tau_last
    total_energy: int       # sum of tau over the whole run; equals x - n_final
    tau_last: int           # tau at the last positive orbit value
    dyadic: tuple           # DyadicRecord, largest scale first
    trace: Optional[tuple] = None  # (values, taus) int64 arrays when requested

    def to_dict(self, include_dyadic: bool = True) -> dict:
        d = {
            "x": _int_field(self.x),
            "a_x": _int_field(self.a_x),
            "n_final": _int_field(self.n_final),
            "total_energy": _int_field(self.total_energy),
            "tau_last": _int_field(self.tau_last),
        }
        if include_dyadic:
            d["dyadic"] = [r.to_dict() for r in self.dyadic]
        return d


def _int_field(v: int):
    # JSON numbers are only exact up to 2**53; beyond that emit decimal strings.
    return v if abs(v) < (1 << 53) else str(v)


def _frac_field(f: Optional[Fraction]):
    return None if f is None else f"{f.numerator}/{f.denominator}"


def orbit_step(n: int) -> int:
    """One step of the recursion: n - tau(n)."""
    if n < 1:
        raise ValueError(f"orbit_step needs n >= 1, got {n}")
    return n - divisor_count(n)


# -- walk state ----------------------------------------------------------------


class _State:
    __slots__ = ("x", "n", "j", "e", "sq", "tau_last", "k_top", "pending",
                 "snaps", "delta_acc", "complete")

    def __init__(self, x: int):
        self.x = x
        self.n = x
        self.j = 0
        self.e = 0
        self.sq = 0
        self.tau_last = 0
        self.k_top = (x - 1).bit_length() - 1  # largest k with 2**k < x; -1 for x=1
        self.pending = self.k_top
        self.snaps: dict[int, _Snap] = {self.k_top + 1: _Snap(0, x, 0, 0)}
        self.delta_acc = [0] * (self.k_top + 1)
        self.complete = False


def _update_window_maxima(delta_acc: list, k_top: int, blo: int, bhi: int,
                          counts: np.ndarray) -> None:
    # windows (2**(k-1), 4*2**k] intersected with the block [blo, bhi)
    for k in range(k_top + 1):
        wlo = (1 << k) // 2 + 1
        whi = (1 << k) * 4
        a = max(blo, wlo)
        b = min(bhi - 1, whi)
        if a <= b:
            m = int(counts[a - blo:b - blo + 1].max())
            if m > delta_acc[k]:
                delta_acc[k] = m


def _block_feed(start_hi: int, block_size: int, threads: int):
    """Yield (lo, hi, counts_list, counts_arr) descending from start_hi to 1.

    Blocks are pure functions of their range, so prefetching with worker
    threads cannot change any result.
    """
    bounds = []
    hi = start_hi
    while hi > 1:
        lo = max(1, hi - block_size)
        bounds.append((lo, hi))
        hi = lo

    def produce(span):
        lo, hi = span
        blk = sieve_block(lo, hi, block_size=block_size)
        return lo, hi, blk.counts.tolist(), blk.counts

    if threads <= 1:
        for span in bounds:
            yield produce(span)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pending = deque()
            it = iter(bounds)
            for span in it:
                pending.append(pool.submit(produce, span))
                if len(pending) >= threads + 1:
                    break
            for span in it:
                yield pending.popleft().result()
                pending.append(pool.submit(produce, span))
            while pending:
                yield pending.popleft().result()


def _advance(st: _State, counts: list, base: int, floor: int, ckpt_at: int,
             trace_vals, trace_taus) -> None:
    """Step until n drops below the block base, hits the floor, or the step
    index reaches ckpt_at.  Hot loop: locals only."""
    n = st.n
    j = st.j
    e = st.e
    sq = st.sq
    lt = st.tau_last
    k = st.pending
    thr = (1 << k) if k >= 0 else -(1 << 62)
    snaps = st.snaps
    collect = trace_vals is not None
    while n >= base and n > floor:
        t = counts[n - base]
        if collect:
            trace_vals.append(n)
            trace_taus.append(t)
        e += t
        sq += t * t
        n -= t
        j += 1
        lt = t
        while n <= thr:
            snaps[k] = _Snap(j, n, e, sq)
            k -= 1
            thr = (thr >> 1) if k >= 0 else -(1 << 62)
        if j == ckpt_at:
            break
    st.n = n
    st.j = j
    st.e = e
    st.sq = sq
    st.tau_last = lt
    st.pending = k


def _drive(st: _State, options: RunOptions) -> OrbitSummary:
    if options.keep_trace and options.checkpoint_path:
        raise ValueError("keep_trace cannot be combined with checkpointing")
    if options.stop_below is not None and not options.checkpoint_path:
        raise ValueError("stop_below requires a checkpoint_path")

    floor = options.stop_below or 0
    trace_vals = [] if options.keep_trace else None
    trace_taus = [] if options.keep_trace else None
    ckpt_at = st.j + options.checkpoint_every if options.checkpoint_path else -1

    table = options.tau_table
    if table is not None:
        if table.xmax < st.n:
            raise ValueError(f"tau table covers [1, {table.xmax}], run needs {st.n}")
        while st.n > floor:
            _advance(st, table.lst, 1, floor, ckpt_at, trace_vals, trace_taus)
            if st.j == ckpt_at:
                write_checkpoint(options.checkpoint_path, st)
                ckpt_at += options.checkpoint_every
            if options.interrupt_check and options.interrupt_check():
                break
        # window maxima from the table, capped at x: identical to what the
        # block path sees (it sieves exactly [1, x])
        for k in range(st.k_top + 1):
            wlo = (1 << k) // 2 + 1
            whi = min((1 << k) * 4, st.x)
            if wlo <= whi:
                st.delta_acc[k] = int(table.arr[wlo - 1:whi].max())
    else:
        feed = _block_feed(st.n + 1, options.block_size, options.threads)
        try:
            for lo, hi, counts_list, counts_arr in feed:
                _update_window_maxima(st.delta_acc, st.k_top, lo, hi, counts_arr)
                while st.n >= lo and st.n > floor:
                    _advance(st, counts_list, lo, floor, ckpt_at,
                             trace_vals, trace_taus)
                    if st.j == ckpt_at:
                        write_checkpoint(options.checkpoint_path, st)
                        ckpt_at += options.checkpoint_every
                if st.n <= floor:
                    break
                if options.interrupt_check and options.interrupt_check():
                    break
        finally:
            feed.close()

    if st.n > 0:
        if options.checkpoint_path:
            write_checkpoint(options.checkpoint_path, st)
            raise OrbitInterrupted(Path(options.checkpoint_path))
        raise OrbitInterrupted(None)

    st.complete = True
    if options.checkpoint_path:
        write_checkpoint(options.checkpoint_path, st)

    trace = None
    if options.keep_trace:
        trace = (np.array(trace_vals, dtype=np.int64),
                 np.array(trace_taus, dtype=np.int64))
    return _finalize(st, options, trace)


def _finalize(st: _State, options: RunOptions, trace=None) -> OrbitSummary:
    if st.e != st.x - st.n:
        raise InvariantError(
            f"energy identity violated: energy={st.e}, x-n_final={st.x - st.n}")
    if not (0 >= st.n > -st.tau_last):
        raise InvariantError(
            f"final value {st.n} outside (-tau_last, 0], tau_last={st.tau_last}")

    records = []
    for k in range(st.k_top, -1, -1):
        scale = 1 << k
        enter = st.snaps[k + 1]
        exit_ = st.snaps[k]
        steps = exit_.j - enter.j
        energy = exit_.energy - enter.energy
        if energy != enter.n - exit_.n:
            raise InvariantError(f"telescoping failed at scale {scale}")
        sqsum = exit_.sq - enter.sq
        if steps > 0:
            mean = Fraction(energy, steps)
            var = Fraction(sqsum, steps) - mean * mean
        else:
            mean = var = None
        exact = scale <= options.exact_delta_limit
        if exact and 4 * scale > st.x:
            # window sticks out above the sieved range; finish it exactly
            wlo = scale // 2 + 1
            delta = max(st.delta_acc[k], tau_range_max(wlo, 4 * scale + 1))
        else:
            delta = st.delta_acc[k]
            exact = exact or 4 * scale <= st.x
        records.append(DyadicRecord(
            scale=scale,
            enter_index=enter.j,
            exit_index=exit_.j,
            steps=steps,
            energy=energy,
            tau_sq_sum=sqsum,
            tau_mean=mean,
            tau_var=var,
            window_tau_max=delta,
            window_exact=exact,
            entered_from_above=enter.j > 0 or enter.n == 2 * scale,
        ))
    return OrbitSummary(
        x=st.x,
        a_x=st.j,
        n_final=st.n,
        total_energy=st.e,
        tau_last=st.tau_last,
        dyadic=tuple(records),
        trace=trace,
    )


def run_orbit(x: int, options: Optional[RunOptions] = None) -> OrbitSummary:
    """Walk the orbit of x to termination and summarize it."""
    if x < 1:
        raise ValueError(f"run_orbit needs x >= 1, got {x}")
    return _drive(_State(x), options or RunOptions())


# -- checkpointing --------------------------------------------------------------

_CKPT_MAGIC = b"OLCK"
_CKPT_VERSION = 1
_HDR = struct.Struct("<4sI")
_BODY = struct.Struct("<QqQQQQBii")
_SNAP = struct.Struct("<iQqQQ")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")


def write_checkpoint(path, st: _State) -> None:
    buf = bytearray()
    buf += _HDR.pack(_CKPT_MAGIC, _CKPT_VERSION)
    buf += _BODY.pack(st.x, st.n, st.j, st.e, st.sq, st.tau_last,
                      1 if st.complete else 0, st.k_top, st.pending)
    snaps = sorted(st.snaps.items(), reverse=True)
    buf += _U32.pack(len(snaps))
    for k, s in snaps:
        buf += _SNAP.pack(k, s.j, s.n, s.energy, s.sq)
    buf += _U32.pack(len(st.delta_acc))
    for d in st.delta_acc:
        buf += _U16.pack(d)
    buf += _U32.pack(zlib.crc32(buf))
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(buf)
    os.replace(tmp, path)


def _read_checkpoint(path) -> _State:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < _HDR.size + _U32.size:
        raise CheckpointError(f"checkpoint {path} truncated")
    body, crc = raw[:-_U32.size], _U32.unpack(raw[-_U32.size:])[0]
    if zlib.crc32(body) != crc:
        raise CheckpointError(f"checkpoint {path} corrupted (checksum mismatch)")
    magic, version = _HDR.unpack_from(raw, 0)
    if magic != _CKPT_MAGIC:
        raise CheckpointError(f"{path} is not an orbit checkpoint")
    if version != _CKPT_VERSION:
        raise CheckpointError(
            f"checkpoint version {version} not supported (expected {_CKPT_VERSION})")
    off = _HDR.size
    x, n, j, e, sq, tau_last, complete, k_top, pending = _BODY.unpack_from(raw, off)
    off += _BODY.size
    st = _State(x)
    st.n, st.j, st.e, st.sq, st.tau_last = n, j, e, sq, tau_last
    st.k_top, st.pending = k_top, pending
    st.complete = bool(complete)
    nsnaps = _U32.unpack_from(raw, off)[0]
    off += _U32.size
    st.snaps = {}
    for _ in range(nsnaps):
        k, sj, sn, se, ssq = _SNAP.unpack_from(raw, off)
        off += _SNAP.size
        st.snaps[k] = _Snap(sj, sn, se, ssq)
    ndelta = _U32.unpack_from(raw, off)[0]
    off += _U32.size
    st.delta_acc = []
    for _ in range(ndelta):
        st.delta_acc.append(_U16.unpack_from(raw, off)[0])
        off += _U16.size
    return st


def resume(path, options: Optional[RunOptions] = None) -> OrbitSummary:
    """Continue (or re-finalize) a checkpointed run.

    The state stores only walk progress, never block layout, so resuming with
    a different block size or thread count reproduces the identical summary.
    """
    options = options or RunOptions()
    if options.keep_trace:
        raise ValueError("cannot reconstruct a trace for a resumed run")
    st = _read_checkpoint(path)
    if st.complete:
        return _finalize(st, options)
    if options.checkpoint_path is None:
        options = dataclasses.replace(options, checkpoint_path=str(path))
    return _drive(st, options)


# -- segments -------------------------------------------------------------------


def orbit_segment(x: int, scale: int,
                  block_size: int = DEFAULT_BLOCK_SIZE) -> list:
    """Visited (n_j, tau(n_j)) pairs while the orbit of x crosses
    (scale, 2*scale]: indices from the first j with n_j <= 2*scale up to, not
    including, the first with n_j <= scale.

    Walks from x and stops at the lower boundary.  Returns [] if the orbit
    jumps over the interval entirely.
    """
    if scale < 2:
        raise ValueError(f"scale must be >= 2, got {scale}")
    if scale >= x:
        raise NoCrossingError(f"orbit of {x} never enters ({scale}, {2 * scale}]")
    seg = []
    n = x
    hi = x + 1
    upper = 2 * scale
    while n > scale:
        lo = max(1, hi - block_size)
        if n < lo:
            hi = n + 1
            lo = max(1, hi - block_size)
        counts = sieve_block(lo, hi, block_size=block_size).counts.tolist()
        while n >= lo and n > scale:
            t = counts[n - lo]
            if n <= upper:
                seg.append((n, t))
            n -= t
        hi = lo
    return seg


def segment_from_summary(summary: OrbitSummary, scale: int):
    """Slice the crossing of (scale, 2*scale] out of a traced run.

    Returns (values, taus) int64 arrays.
    """
    if summary.trace is None:
        raise ValueError("summary was produced without keep_trace")
    for rec in summary.dyadic:
        if rec.scale == scale:
            values, taus = summary.trace
            return values[rec.enter_index:rec.exit_index], \
                taus[rec.enter_index:rec.exit_index]
    raise NoCrossingError(f"no dyadic record at scale {scale}")


# -- bulk orbit lengths ----------------------------------------------------------


def orbit_lengths_upto(limit: int, block_size: int = DEFAULT_BLOCK_SIZE) -> np.ndarray:
    """a(n) for all 1 <= n <= limit by the upward recurrence
    a(n) = 1 + a(n - tau(n)), a(m) = 0 for m <= 0.

    Independent of the downward walk in run_orbit; used for the dense
    orbit-length curve and as a cross-check oracle.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    out = [0] * (limit + 1)
    lo = 1
    while lo <= limit:
        hi = min(limit + 1, lo + block_size)
        counts = sieve_block(lo, hi, block_size=block_size).counts.tolist()
        for n in range(lo, hi):
            m = n - counts[n - lo]
            out[n] = 1 + (out[m] if m > 0 else 0)
        lo = hi
    return np.array(out, dtype=np.int64)
