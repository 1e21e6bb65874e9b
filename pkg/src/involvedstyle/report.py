"""Ratio histograms by gender: binning, CSV twin and a dependency-free SVG."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence
from xml.sax.saxutils import escape

__all__ = ["HistogramBin", "NothingToPlotError", "histogram_bins", "bins_to_csv", "render_svg",
           "DEFAULT_BIN_WIDTH"]

DEFAULT_BIN_WIDTH = {"PAPER": 0.1, "PATENT": 0.05}

# float slack so that e.g. 0.3 / 0.1 lands in bin 3, not 2
_EDGE_EPS = 1e-9


class NothingToPlotError(ValueError):
    def __init__(self, msg: str = "nothing to plot"):
        super().__init__(msg)


@dataclass(frozen=True)
class HistogramBin:
    lo: float
    hi: float
    counts: Mapping[str, int]
    percents: Mapping[str, float]
    """Percent of each group's total falling in this bin."""

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def share(self, group: str) -> Optional[float]:
        return self.counts.get(group, 0) / self.total if self.total else None


def _bin_index(x: float, width: float) -> int:
    return int(math.floor(x / width + _EDGE_EPS))


def histogram_bins(values: Mapping[str, Sequence[Optional[float]]], bin_width: float = 0.1) -> List[HistogramBin]:
    """Bin each group's ratios into ``[k*w, (k+1)*w)`` intervals starting at 0.

    ``None``/NaN values (undefined ratios) are skipped. Raises
    NothingToPlotError when no group has a defined value.
    """
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    clean: Dict[str, List[float]] = {}
    for group, vals in values.items():
        clean[group] = [float(v) for v in vals if v is not None and not math.isnan(float(v))]
    if not any(clean.values()):
        raise NothingToPlotError()
    negative = [v for vs in clean.values() for v in vs if v < 0]
    if negative:
        raise ValueError(f"ratios must be non-negative, got {negative[0]}")
    top = max(_bin_index(v, bin_width) for vs in clean.values() for v in vs)
    counts = {g: [0] * (top + 1) for g in clean}
    for g, vs in clean.items():
        for v in vs:
            counts[g][_bin_index(v, bin_width)] += 1
    totals = {g: len(vs) for g, vs in clean.items()}
    bins = []
    for k in range(top + 1):
        c = {g: counts[g][k] for g in clean}
        pct = {g: (100.0 * c[g] / totals[g] if totals[g] else 0.0) for g in clean}
        bins.append(HistogramBin(round(k * bin_width, 10), round((k + 1) * bin_width, 10), c, pct))
    return bins


def bins_to_csv(bins: Sequence[HistogramBin], groups: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi"] + [f"count_{g}" for g in groups] + [f"pct_{g}" for g in groups]
               + [f"share_{g}" for g in groups])
    for b in bins:
        shares = [b.share(g) for g in groups]
        w.writerow([repr(b.lo), repr(b.hi)] + [b.counts.get(g, 0) for g in groups]
                   + [f"{b.percents.get(g, 0.0):.6f}" for g in groups]
                   + ["" if s is None else f"{s:.6f}" for s in shares])
    return buf.getvalue()


_COLORS = {"F": "#d95f02", "M": "#1b9e77"}
_LABELS = {"F": "Female", "M": "Male"}


def render_svg(bins: Sequence[HistogramBin], groups: Sequence[str], title: str = "",
               width: int = 720, height: int = 400) -> str:
    """Grouped bar chart of per-group percentages; output is deterministic."""
    ml, mr, mt, mb = 60, 20, 40, 60
    pw, ph = width - ml - mr, height - mt - mb
    ymax = max((b.percents.get(g, 0.0) for b in bins for g in groups), default=0.0)
    ymax = max(5.0, math.ceil(ymax / 5.0) * 5.0)
    slot = pw / max(len(bins), 1)
    bar = slot * 0.8 / max(len(groups), 1)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    # y grid and labels
    for i in range(6):
        v = ymax * i / 5
        y = mt + ph - ph * i / 5
        out.append(f'<line x1="{ml}" y1="{y:.2f}" x2="{ml + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{ml - 6}" y="{y + 4:.2f}" text-anchor="end">{v:g}%</text>')
    for k, b in enumerate(bins):
        x0 = ml + k * slot + slot * 0.1
        for j, g in enumerate(groups):
            h = ph * b.percents.get(g, 0.0) / ymax
            out.append(
                f'<rect x="{x0 + j * bar:.2f}" y="{mt + ph - h:.2f}" width="{bar:.2f}" height="{h:.2f}" '
                f'fill="{_COLORS.get(g, "#7570b3")}"><title>{escape(_LABELS.get(g, g))} '
                f'[{b.lo:g}, {b.hi:g}): {b.counts.get(g, 0)} ({b.percents.get(g, 0.0):.2f}%)</title></rect>')
        if len(bins) <= 25 or k % max(1, len(bins) // 20) == 0:
            out.append(f'<text x="{ml + k * slot + slot / 2:.2f}" y="{mt + ph + 14}" text-anchor="middle">{b.lo:g}</text>')
    out.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">Involved-Informational Ratio</text>')
    out.append(f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {mt + ph / 2:.1f})">Percent of group total</text>')
    for j, g in enumerate(groups):
        lx = ml + pw - 110
        ly = mt + 5 + j * 16
        out.append(f'<rect x="{lx}" y="{ly}" width="10" height="10" fill="{_COLORS.get(g, "#7570b3")}"/>')
        out.append(f'<text x="{lx + 15}" y="{ly + 9}">{escape(_LABELS.get(g, g))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
