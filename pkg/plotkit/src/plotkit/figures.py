"""Render the four reference figures from recipe CSVs.

No computation beyond the overlay curves, which are recomputed from the CSV's
x column so the renderer never touches raw orbit data.  Output is
deterministic: fixed style, fixed SVG hash salt, no embedded timestamps.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402

FIGURE_IDS = ("an-raw", "an-ratios", "tau-hist-avg", "max-concentration")

STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotkit",
    "font.size": 10,
}


class PlotkitError(RuntimeError):
    """Bad figure spec or CSV that cannot back the requested figure."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    source: Path            # input CSV produced by an orbitlab recipe
    out: Path               # output image (SVG/PDF preferred)
    title: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None


def read_table(path) -> dict:
    """CSV as column-major dict with numeric cells coerced."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PlotkitError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise PlotkitError(f"{path} is empty")
    header, data = rows[0], rows[1:]
    if not data:
        raise PlotkitError(f"{path} has a header but no data rows")
    cols = {name: [] for name in header}
    for row in data:
        for name, cell in zip(header, row):
            cols[name].append(_coerce(cell))
    return cols


def _coerce(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def _need(cols: dict, names, source) -> None:
    missing = [n for n in names if n not in cols]
    if missing:
        raise PlotkitError(
            f"{source}: missing column(s) {', '.join(missing)}; "
            f"has {', '.join(cols)}")


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure without writing it; tests introspect this."""
    if spec.figure_id not in FIGURE_IDS:
        raise PlotkitError(f"unknown figure id {spec.figure_id!r}; "
                           f"known: {', '.join(FIGURE_IDS)}")
    cols = read_table(spec.source)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        _BUILDERS[spec.figure_id](ax, cols, spec)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
    return fig


def plot(spec: FigureSpec) -> Path:
    """Render the figure; the output file exists iff this returns."""
    fig = build_figure(spec)
    out = Path(spec.out)
    try:
        fig.savefig(out, metadata=_no_date_metadata(out))
    finally:
        plt.close(fig)
    if out.suffix.lower() == ".svg":
        out.write_text(_canonical_svg_ids(out.read_text()))
    return out


_SVG_ID_DEF = re.compile(r'id="([A-Za-z]{1,2}[0-9a-f]{10})"')


def _canonical_svg_ids(text: str) -> str:
    # matplotlib derives element ids from object identity, which varies run
    # to run; renumber them by first appearance so identical figures are
    # identical bytes
    mapping = {}
    for match in _SVG_ID_DEF.finditer(text):
        mapping.setdefault(match.group(1), f"pk{len(mapping):04d}")
    for old, new in mapping.items():
        text = text.replace(old, new)
    return text


def _no_date_metadata(out: Path):
    suffix = out.suffix.lower()
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return None


def _build_an_raw(ax, cols, spec):
    _need(cols, ("x", "a_x"), spec.source)
    xs, ys = cols["x"], cols["a_x"]
    ax.plot(xs, ys, lw=0.8, label="orbit length")
    ax.plot(xs, [x / math.log(x) for x in xs], "--", label="x / ln x")
    ax.plot(xs, [x / (math.log(x) + math.log(math.log(x))) for x in xs],
            ":", label="x / (ln x + ln ln x)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or "x")
    ax.set_ylabel(spec.ylabel or "steps to reach 0")
    ax.legend()


RATIO_COLUMNS = ("r_logx", "r_loglog", "r_li")
RATIO_LABELS = {"r_logx": "vs x / ln x",
                "r_loglog": "vs x / (ln x + ln ln x)",
                "r_li": "vs li(x)"}


def _build_an_ratios(ax, cols, spec):
    _need(cols, ("x",) + RATIO_COLUMNS, spec.source)
    xs = cols["x"]
    for name in RATIO_COLUMNS:
        ax.plot(xs, cols[name], marker="o", ms=3, label=RATIO_LABELS[name])
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel(spec.xlabel or "x")
    ax.set_ylabel(spec.ylabel or "normalized orbit length")
    ax.legend()


def _build_tau_hist(ax, cols, spec):
    _need(cols, ("bin", "weight"), spec.source)
    bins, weights = cols["bin"], cols["weight"]
    width = min((b2 - b1 for b1, b2 in zip(bins, bins[1:])), default=1)
    ax.bar(bins, weights, width=width * 0.9, align="edge")
    ax.set_xlabel(spec.xlabel or "divisor count")
    ax.set_ylabel(spec.ylabel or "mean energy fraction")


def _build_max_concentration(ax, cols, spec):
    _need(cols, ("N", "max_frac"), spec.source)
    if "mode" in cols:
        modes = sorted(set(cols["mode"]))
        for mode in modes:
            pts = sorted((n, f) for n, f, m in
                         zip(cols["N"], cols["max_frac"], cols["mode"])
                         if m == mode)
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", ms=3, label=mode)
        ax.legend()
    else:
        pts = sorted(zip(cols["N"], cols["max_frac"]))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(spec.xlabel or "scale N")
    ax.set_ylabel(spec.ylabel or "max single-level energy / N")


_BUILDERS = {
    "an-raw": _build_an_raw,
    "an-ratios": _build_an_ratios,
    "tau-hist-avg": _build_tau_hist,
    "max-concentration": _build_max_concentration,
}
