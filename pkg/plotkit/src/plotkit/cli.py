"""plotkit --figure <id> --in <csv> --out <image>"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_IDS, FigureSpec, PlotkitError, plot


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    ap.add_argument("--figure", required=True, choices=FIGURE_IDS)
    ap.add_argument("--in", dest="source", required=True,
                    help="input CSV from an orbitlab recipe")
    ap.add_argument("--out", required=True, help="output image (SVG/PDF)")
    ap.add_argument("--title")
    ap.add_argument("--xlabel")
    ap.add_argument("--ylabel")
    args = ap.parse_args(argv)
    spec = FigureSpec(figure_id=args.figure, source=Path(args.source),
                      out=Path(args.out), title=args.title,
                      xlabel=args.xlabel, ylabel=args.ylabel)
    try:
        out = plot(spec)
    except PlotkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
