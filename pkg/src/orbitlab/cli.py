"""Command-line entry point.

Subcommand style, one binary.  Standard output stays machine-parsable;
progress and diagnostics go to standard error.  Exit codes: 0 success,
1 compute/invariant failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import __version__
from .analytics import ratio_table
from .envelope import ResultEnvelope, emit, envelope_to_dict
from .mixing import default_moduli, detect_ladders, mixing_report
from .orbit import (InvariantError, NoCrossingError, OrbitInterrupted,
                    RunOptions, resume, run_orbit, segment_from_summary)
from .recipes import SMALL_X_LI_NOTE, TABLE1_HEADER, recipe_figures
from .sampler import level_sweep, sample_progressions, scan_segment
from .sieve import DEFAULT_BLOCK_SIZE, sieve_block

log = logging.getLogger("orbitlab")

MIXING_HEADER = ["N", "V", "discrepancy", "discrepancy_norm", "q", "h",
                 "bias", "phase_msq", "res_conc"]
LADDER_RUNS_HEADER = ["N", "start_index", "length", "level", "violations",
                      "top_value", "bottom_value"]
LADDER_SAMPLE_HEADER = ["N", "T", "r", "sample", "start", "eps", "R"]
CONC_SCAN_HEADER = ["x", "N", "V", "mode", "level", "energy", "frac"]


def parse_count(text: str) -> int:
    """Positive integer in plain, scientific (1e6), or power (2^22) notation."""
    s = text.strip()
    try:
        if "^" in s:
            base, _, expo = s.partition("^")
            value = int(base) ** int(expo)
        elif any(c in s for c in "eE."):
            d = Decimal(s)
            value = int(d)
            if value != d:
                raise ValueError
        else:
            value = int(s)
    except (ValueError, InvalidOperation):
        raise argparse.ArgumentTypeError(f"not a count: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def parse_count_list(text: str) -> list:
    return [parse_count(tok) for tok in text.split(",") if tok.strip()]


def parse_float_list(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a float list: {text!r}")


def _resolve_threads(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("ORBITLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"ORBITLAB_THREADS is not an integer: {env!r}")
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="orbitlab",
        description="Workbench for the divisor-step recursion n -> n - tau(n).")
    p.add_argument("--version", action="version", version=f"orbitlab {__version__}")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for sieving (default: ORBITLAB_THREADS "
                        "or machine parallelism)")
    p.add_argument("--log-every", type=parse_count, default=10**8,
                   help="progress line to stderr every this many sieved "
                        "integers (default 1e8)")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="walk one orbit and emit its summary")
    run.add_argument("--x", type=parse_count, help="start value")
    run.add_argument("--emit", help="output JSON path (default: stdout)")
    run.add_argument("--segments", choices=["dyadic"],
                     help="include per-dyadic-scale records in the summary")
    run.add_argument("--checkpoint", help="checkpoint file path")
    run.add_argument("--every", type=parse_count, default=1 << 26,
                     help="checkpoint cadence in steps (default 2^26)")
    run.add_argument("--resume", help="resume from this checkpoint file")
    run.add_argument("--block-size", type=parse_count, default=DEFAULT_BLOCK_SIZE)
    run.add_argument("--stop-below", type=parse_count,
                     help="debug: checkpoint and stop once n drops to this")

    table = sub.add_parser("table", help="orbit lengths and normalized ratios")
    table.add_argument("--x", type=parse_count_list, required=True,
                       help="comma-separated start values, e.g. 10,1e2,1e3")
    table.add_argument("--emit", required=True, help="output CSV path")
    table.add_argument("--round", type=int, default=None,
                       help="display rounding in decimals (default: full "
                            "precision)")

    mixing = sub.add_parser("mixing", help="residue/bias diagnostics on a scale")
    mixing.add_argument("--x", type=parse_count, required=True)
    mixing.add_argument("--scale", default="all-dyadic",
                        help="dyadic scale N, or all-dyadic (default)")
    mixing.add_argument("--q-max", type=int, default=64)
    mixing.add_argument("--prime-limit", type=int, default=101)
    mixing.add_argument("--emit", required=True, help="output CSV path")

    lad = sub.add_parser("ladders-in-orbit",
                         help="near-arithmetic runs inside orbit crossings")
    lad.add_argument("--x", type=parse_count, required=True)
    lad.add_argument("--step-tol", type=float, default=0.2)
    lad.add_argument("--level-tol", type=float, default=0.2)
    lad.add_argument("--min-len", type=int, default=8)
    lad.add_argument("--budget", type=float, default=0.1,
                     help="violating fraction allowed per run (default 0.1)")
    lad.add_argument("--emit", required=True, help="output CSV path")

    ls = sub.add_parser("ladder-sample",
                        help="concentration ratios along random progressions")
    ls.add_argument("--N", type=parse_count, required=True, dest="scale")
    ls.add_argument("--T", default="auto",
                    help="level: integer, auto (round ln N), or sweep")
    ls.add_argument("--samples", type=parse_count, default=500)
    ls.add_argument("--eps", type=parse_float_list, default=[0.1, 0.2, 0.3])
    ls.add_argument("--seed", type=int, default=42)
    ls.add_argument("--r-factor", type=float, default=0.9)
    ls.add_argument("--emit", required=True, help="output CSV path")

    conc = sub.add_parser("conc-scan",
                          help="single-level energy concentration per scale")
    conc.add_argument("--x", type=parse_count, required=True)
    conc.add_argument("--mode", choices=["exact-level", "dyadic-band", "both"],
                      default="both")
    conc.add_argument("--emit", required=True, help="output CSV path")

    tau = sub.add_parser("tau", help="emit n,tau rows for a range")
    tau.add_argument("--lo", type=parse_count, required=True)
    tau.add_argument("--hi", type=parse_count, required=True)
    tau.add_argument("--emit", default="csv",
                     help="'csv' for stdout, or an output path")

    figs = sub.add_parser("figures", help="write the four figure input CSVs")
    figs.add_argument("--out", required=True, help="output directory")
    figs.add_argument("--an-limit", type=parse_count, default=10**4)
    figs.add_argument("--k-max", type=int, default=4)
    figs.add_argument("--hist-scale", type=parse_count, default=10**6)
    figs.add_argument("--hist-samples", type=parse_count, default=200)
    figs.add_argument("--conc-x", type=parse_count, default=10**6)
    figs.add_argument("--seed", type=int, default=42)
    return p


def _cmd_run(args, threads: int) -> int:
    opts = RunOptions(block_size=args.block_size, threads=threads,
                      checkpoint_path=args.checkpoint,
                      checkpoint_every=args.every,
                      stop_below=args.stop_below)
    if args.checkpoint:
        flag = {"hit": False}

        def _on_signal(signum, frame):
            flag["hit"] = True
        signal.signal(signal.SIGTERM, _on_signal)
        signal.signal(signal.SIGINT, _on_signal)
        opts.interrupt_check = lambda: flag["hit"]
    try:
        if args.resume:
            summary = resume(args.resume, opts)
        else:
            if args.x is None:
                print("error: run needs --x or --resume", file=sys.stderr)
                return 2
            summary = run_orbit(args.x, opts)
    except OrbitInterrupted as exc:
        print(f"interrupted; resumable checkpoint at {exc.checkpoint_path}",
              file=sys.stderr)
        return 1
    env = ResultEnvelope(
        kind="orbit-summary",
        config={"x": summary.x, "block_size": args.block_size,
                "segments": args.segments},
        payload=summary.to_dict(include_dyadic=args.segments == "dyadic"))
    if args.emit:
        emit(env, args.emit, fmt="json")
    else:
        print(json.dumps(envelope_to_dict(env), indent=2, sort_keys=True))
    return 0


def _cmd_table(args, threads: int) -> int:
    opts = RunOptions(threads=threads)
    pairs = []
    for x in args.x:
        summary = run_orbit(x, opts)
        pairs.append((x, summary.a_x))
    rows = ratio_table(pairs)
    payload = {"header": TABLE1_HEADER,
               "rows": [[r.x, r.a_x, r.r_logx, r.r_loglog, r.r_li] for r in rows]}
    env = ResultEnvelope(kind="table1", config={"x": args.x, "round": args.round},
                         notes=(SMALL_X_LI_NOTE,), payload=payload)
    emit(env, args.emit, round_digits=args.round)
    return 0


def _dyadic_segments(x: int, threads: int, min_scale: int = 4):
    summary = run_orbit(x, RunOptions(keep_trace=True, threads=threads))
    for rec in summary.dyadic:
        if rec.steps > 0 and rec.scale >= min_scale:
            yield rec, segment_from_summary(summary, rec.scale)


def _cmd_mixing(args, threads: int) -> int:
    moduli = default_moduli(args.q_max, args.prime_limit)
    if args.scale == "all-dyadic":
        targets = list(_dyadic_segments(args.x, threads))
    else:
        scale = parse_count(args.scale)
        found = [(rec, seg) for rec, seg in _dyadic_segments(args.x, threads)
                 if rec.scale == scale]
        if not found:
            raise NoCrossingError(f"orbit of {args.x} has no crossing at {scale}")
        targets = found
    rows = []
    for rec, seg in targets:
        rep = mixing_report(seg, rec.scale, moduli)
        for q in moduli:
            for h in range(1, q):
                rows.append([rec.scale, rep.steps, rep.discrepancy,
                             rep.discrepancy_norm, q, h, rep.bias[(q, h)],
                             rep.phase_msq[(q, h)],
                             float(rep.residue_conc[(q, h)])])
    env = ResultEnvelope(kind="mixing",
                         config={"x": args.x, "scale": args.scale,
                                 "q_max": args.q_max,
                                 "prime_limit": args.prime_limit},
                         payload={"header": MIXING_HEADER, "rows": rows})
    emit(env, args.emit)
    return 0


def _cmd_ladders(args, threads: int) -> int:
    rows = []
    for rec, seg in _dyadic_segments(args.x, threads):
        for run in detect_ladders(seg, args.step_tol, args.level_tol,
                                  args.min_len, args.budget):
            rows.append([rec.scale, run.start, run.length, run.level,
                         run.violations, run.values[0], run.values[-1]])
    env = ResultEnvelope(kind="ladder-runs",
                         config={"x": args.x, "step_tol": args.step_tol,
                                 "level_tol": args.level_tol,
                                 "min_len": args.min_len,
                                 "budget": args.budget},
                         payload={"header": LADDER_RUNS_HEADER, "rows": rows})
    emit(env, args.emit)
    return 0


def _cmd_ladder_sample(args, threads: int) -> int:
    if args.T == "sweep":
        reports = level_sweep(args.scale, count=args.samples,
                              eps_list=args.eps, seed=args.seed,
                              r_factor=args.r_factor)
    else:
        level = None if args.T == "auto" else parse_count(args.T)
        reports = [sample_progressions(args.scale, level=level,
                                       count=args.samples, eps_list=args.eps,
                                       seed=args.seed, r_factor=args.r_factor)]
    rows = []
    for rep in reports:
        for s in rep.samples:
            for eps in args.eps:
                rows.append([rep.scale, rep.level, rep.length, s.index,
                             s.start, eps, s.ratios[eps]])
    env = ResultEnvelope(kind="ladder-sample",
                         config={"N": args.scale, "T": args.T,
                                 "samples": args.samples, "eps": args.eps,
                                 "seed": args.seed, "r_factor": args.r_factor},
                         payload={"header": LADDER_SAMPLE_HEADER, "rows": rows})
    emit(env, args.emit)
    for rep in reports:
        maxima = {str(eps): rep.max_ratios[eps] for eps in args.eps}
        log.info("N=%d T=%d max R: %s", rep.scale, rep.level, maxima)
    return 0


def _cmd_conc_scan(args, threads: int) -> int:
    modes = ["exact-level", "dyadic-band"] if args.mode == "both" else [args.mode]
    rows = []
    for rec, seg in _dyadic_segments(args.x, threads):
        for mode in modes:
            scan = scan_segment(seg, rec.scale, mode)
            for level in sorted(scan.levels):
                rows.append([args.x, rec.scale, scan.steps, mode, level,
                             scan.levels[level], scan.levels[level] / rec.scale])
    env = ResultEnvelope(kind="conc-scan",
                         config={"x": args.x, "mode": args.mode},
                         payload={"header": CONC_SCAN_HEADER, "rows": rows})
    emit(env, args.emit)
    return 0


def _cmd_tau(args, threads: int) -> int:
    if args.hi <= args.lo:
        print(f"error: need lo < hi, got {args.lo}, {args.hi}", file=sys.stderr)
        return 2
    lines = ["n,tau"]
    lo = args.lo
    while lo < args.hi:
        hi = min(args.hi, lo + DEFAULT_BLOCK_SIZE)
        blk = sieve_block(lo, hi)
        lines.extend(f"{lo + i},{c}" for i, c in enumerate(blk.counts.tolist()))
        lo = hi
    text = "\n".join(lines) + "\n"
    if args.emit == "csv":
        sys.stdout.write(text)
    else:
        Path(args.emit).write_text(text)
    return 0


def _cmd_figures(args, threads: int) -> int:
    paths = recipe_figures(args.out, an_limit=args.an_limit,
                           table_k_max=args.k_max, hist_scale=args.hist_scale,
                           hist_samples=args.hist_samples, conc_x=args.conc_x,
                           seed=args.seed, threads=threads)
    for fig_id, path in paths.items():
        log.info("%s -> %s", fig_id, path)
    return 0


_DISPATCH = {
    "run": _cmd_run,
    "table": _cmd_table,
    "mixing": _cmd_mixing,
    "ladders-in-orbit": _cmd_ladders,
    "ladder-sample": _cmd_ladder_sample,
    "conc-scan": _cmd_conc_scan,
    "tau": _cmd_tau,
    "figures": _cmd_figures,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = _resolve_threads(args.threads)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    import orbitlab.sieve as sieve_mod
    sieve_mod.PROGRESS_EVERY = args.log_every
    try:
        return _DISPATCH[args.command](args, threads)
    except (InvariantError, NoCrossingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
