"""Orchestrated runs that reproduce the reference tables and write the CSVs
the figure tool consumes.  All outputs are deterministic for a fixed
(config, seed) and idempotent: rerunning overwrites identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence

from .analytics import ratio_table
from .envelope import ResultEnvelope, emit
from .orbit import RunOptions, orbit_lengths_upto, run_orbit
from .sampler import (default_level, sample_progressions, scan_segment,
                      tau_histogram)
from .orbit import segment_from_summary

SMALL_X_LI_NOTE = (
    "li-normalized column recomputed with principal-value li; reference values "
    "for x in {10, 100, 1000} do not match any standard li convention and are "
    "not reproduced")

TABLE1_HEADER = ["x", "a_x", "r_logx", "r_loglog", "r_li"]
TABLE2_HEADER = ["N", "T", "samples", "eps", "max_R"]
AN_RAW_HEADER = ["x", "a_x"]
TAU_HIST_HEADER = ["bin", "weight"]
CONC_SUMMARY_HEADER = ["N", "max_frac", "argmax", "mode"]


def recipe_table1(out_csv, k_max: int = 7, threads: int = 1,
                  round_digits: Optional[int] = None,
                  block_size: Optional[int] = None) -> Path:
    """Orbit lengths and normalized ratios for x = 10, 100, ..., 10**k_max."""
    opts = RunOptions(threads=threads)
    if block_size:
        opts.block_size = block_size
    rows = []
    for k in range(1, k_max + 1):
        x = 10 ** k
        summary = run_orbit(x, opts)
        rows.append((x, summary.a_x))
    table = ratio_table(rows)
    payload = {"header": TABLE1_HEADER,
               "rows": [[r.x, r.a_x, r.r_logx, r.r_loglog, r.r_li]
                        for r in table]}
    env = ResultEnvelope(kind="table1", payload=payload, notes=(SMALL_X_LI_NOTE,),
                         config={"k_max": k_max, "round": round_digits})
    return emit(env, out_csv, round_digits=round_digits)


def recipe_table2(out_csv, cases: Sequence = ((10**4, None), (10**5, None)),
                  samples: int = 500, eps_list: Sequence[float] = (0.1, 0.2, 0.3),
                  seed: int = 42, r_factor: float = 0.9) -> Path:
    """Maximal band-concentration ratios along random progressions, one row
    per (scale, eps)."""
    rows = []
    for scale, level in cases:
        rep = sample_progressions(scale, level=level, count=samples,
                                  eps_list=eps_list, seed=seed,
                                  r_factor=r_factor)
        for eps in eps_list:
            rows.append([scale, rep.level, samples, eps, rep.max_ratios[eps]])
    env = ResultEnvelope(
        kind="table2", payload={"header": TABLE2_HEADER, "rows": rows},
        config={"cases": [[s, t] for s, t in cases], "samples": samples,
                "eps": list(eps_list), "seed": seed, "r_factor": r_factor})
    return emit(env, out_csv)


def recipe_figures(outdir, an_limit: int = 10**4, table_k_max: int = 4,
                   hist_scale: int = 10**6, hist_samples: int = 200,
                   conc_x: int = 10**6, seed: int = 42, threads: int = 1) -> dict:
    """Write the four figure input CSVs; returns {figure id: csv path}."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    # dense orbit-length curve
    lengths = orbit_lengths_upto(an_limit)
    an_rows = [[n, int(lengths[n])] for n in range(2, an_limit + 1)]
    emit(ResultEnvelope(kind="an-raw", config={"limit": an_limit},
                        payload={"header": AN_RAW_HEADER, "rows": an_rows}),
         outdir / "an_raw.csv")

    table1 = recipe_table1(outdir / "table1.csv", k_max=table_k_max,
                           threads=threads)

    hist_rep = sample_progressions(hist_scale, count=hist_samples, seed=seed)
    hist = tau_histogram(hist_rep.samples)
    hist_rows = [[int(b), float(w)] for b, w in zip(hist.bins, hist.weights) if w > 0]
    emit(ResultEnvelope(kind="tau-hist",
                        config={"scale": hist_scale, "samples": hist_samples,
                                "level": hist_rep.level, "seed": seed},
                        payload={"header": TAU_HIST_HEADER, "rows": hist_rows}),
         outdir / "tau_hist.csv")

    summary = run_orbit(conc_x, RunOptions(keep_trace=True, threads=threads))
    conc_rows = []
    for rec in summary.dyadic:
        if rec.steps == 0 or rec.scale < 4:
            continue
        seg = segment_from_summary(summary, rec.scale)
        for mode in ("dyadic-band", "exact-level"):
            scan = scan_segment(seg, rec.scale, mode)
            conc_rows.append([rec.scale, scan.max_frac, scan.argmax, mode])
    conc_rows.sort(key=lambda r: (r[3], r[0]))
    emit(ResultEnvelope(kind="conc-summary", config={"x": conc_x},
                        payload={"header": CONC_SUMMARY_HEADER,
                                 "rows": conc_rows}),
         outdir / "conc_summary.csv")

    return {"an-raw": outdir / "an_raw.csv",
            "an-ratios": table1,
            "tau-hist-avg": outdir / "tau_hist.csv",
            "max-concentration": outdir / "conc_summary.csv"}
