"""Minimal deterministic SVG line plots with sidecar CSV.

No plotting dependency: each figure is a fixed-size SVG built from the
series' polylines, plus a CSV holding exactly the plotted numbers so
the figure can be regenerated elsewhere.  Output is byte-deterministic
for identical inputs.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 34, 52
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _transform(vals, lo, hi, out_lo, out_hi, log):
    if log:
        vals = [math.log10(v) for v in vals]
        lo, hi = math.log10(lo), math.log10(hi)
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in vals]


def _limits(series, idx, log):
    vals = [v for _, xs, ys in series for v in (xs if idx == 0 else ys)]
    if log:
        vals = [v for v in vals if v > 0]
        if not vals:
            raise ValueError("log-scale axis requires positive data")
    return min(vals), max(vals)


def _fmt(v: float) -> str:
    return format(v, ".6g")


def line_plot(
    path,
    series,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> list[str]:
    """Write <path>.svg and <path>.csv for series [(label, xs, ys), ...].

    Returns the two file paths written.
    """
    path = Path(path)
    series = [(str(lab), list(map(float, xs)), list(map(float, ys))) for lab, xs, ys in series]
    if not series or any(len(xs) != len(ys) or not xs for _, xs, ys in series):
        raise ValueError("each series needs equal-length nonempty xs and ys")
    xlo, xhi = _limits(series, 0, logx)
    ylo, yhi = _limits(series, 1, logy)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{_W // 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{_H // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H // 2})">{ylabel}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="#888"/>',
    ]
    # axis corner labels carry the data limits
    parts.append(
        f'<text x="{_ML}" y="{_H - _MB + 16}" font-size="10">{_fmt(xlo)}</text>'
    )
    parts.append(
        f'<text x="{_W - _MR}" y="{_H - _MB + 16}" text-anchor="end" font-size="10">'
        f"{_fmt(xhi)}</text>"
    )
    parts.append(
        f'<text x="{_ML - 4}" y="{_H - _MB}" text-anchor="end" font-size="10">'
        f"{_fmt(ylo)}</text>"
    )
    parts.append(
        f'<text x="{_ML - 4}" y="{_MT + 10}" text-anchor="end" font-size="10">'
        f"{_fmt(yhi)}</text>"
    )
    for k, (label, xs, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        px = _transform(xs, xlo, xhi, _ML, _W - _MR, logx)
        py = _transform(ys, ylo, yhi, _H - _MB, _MT, logy)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 6}" y="{_MT + 16 + 14 * k}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")

    svg_path = path.with_suffix(".svg")
    svg_path.write_text("\n".join(parts) + "\n")

    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "x", "y"])
        for label, xs, ys in series:
            for a, b in zip(xs, ys):
                writer.writerow([label, format(a, ".17g"), format(b, ".17g")])
    return [str(svg_path), str(csv_path)]
