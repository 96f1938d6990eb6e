#!/usr/bin/env python3
"""Reproduce the progression-concentration maxima table.

Default cases run in seconds; add cases like --case 1e6 or --case 1e7:16 for
the larger rows (each sieves its (N, 2N] window once, so 1e8 needs ~200 MB
and a few minutes).
"""

import argparse
import sys
from pathlib import Path

from orbitlab.cli import parse_count
from orbitlab.recipes import recipe_table2


def parse_case(text):
    scale, _, level = text.partition(":")
    return parse_count(scale), (int(level) if level else None)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="table2.csv")
    ap.add_argument("--case", action="append", type=parse_case,
                    help="N or N:T; repeatable (default 1e4, 1e5)")
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    cases = args.case or [(10**4, None), (10**5, None)]
    path = recipe_table2(args.out, cases=cases, samples=args.samples,
                         seed=args.seed)
    print(f"wrote {path}", file=sys.stderr)
    print(Path(path).read_text(), end="")


if __name__ == "__main__":
    main()
