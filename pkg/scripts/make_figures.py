#!/usr/bin/env python3
"""Write the four figure input CSVs (and, if plotkit is installed, render
the figures themselves)."""

import argparse
import shutil
import subprocess
import sys

from orbitlab.cli import parse_count
from orbitlab.recipes import recipe_figures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--an-limit", type=parse_count, default=10**4)
    ap.add_argument("--k-max", type=int, default=4)
    ap.add_argument("--hist-scale", type=parse_count, default=10**6)
    ap.add_argument("--hist-samples", type=int, default=200)
    ap.add_argument("--conc-x", type=parse_count, default=10**6)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--render", action="store_true",
                    help="also render SVGs via the plotkit CLI")
    args = ap.parse_args()
    paths = recipe_figures(args.out, an_limit=args.an_limit,
                           table_k_max=args.k_max, hist_scale=args.hist_scale,
                           hist_samples=args.hist_samples, conc_x=args.conc_x,
                           seed=args.seed)
    for fig_id, path in paths.items():
        print(f"{fig_id}: {path}", file=sys.stderr)
    if args.render:
        if not shutil.which("plotkit"):
            sys.exit("plotkit CLI not found; install the plotkit package")
        for fig_id, path in paths.items():
            out = path.parent / f"{fig_id}.svg"
            subprocess.run(["plotkit", "--figure", fig_id, "--in", str(path),
                            "--out", str(out)], check=True)
            print(f"rendered {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
