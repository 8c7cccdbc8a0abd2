"""
Minimal line-plot SVG writer: axes, ticks, one polyline per series, legend.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=30, bottom=50)


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0**e for e in range(a, b + 1) if lo <= 10.0**e <= hi] or [lo, hi]
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _fmt(v):
    return f"{v:.4g}"


def line_plot(series, *, title="", xlabel="", ylabel="", logx=False, logy=False):
    """
    Render ``series`` (mapping label -> (x, y)) as an SVG document string.

    Non-finite points and, on log axes, non-positive points are dropped.
    """
    cleaned = {}
    for label, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        cleaned[label] = (x[ok], y[ok])
    xs = np.concatenate([v[0] for v in cleaned.values()] or [np.array([0.0, 1.0])])
    ys = np.concatenate([v[1] for v in cleaned.values()] or [np.array([0.0, 1.0])])
    if xs.size == 0:
        xs, ys = np.array([1.0, 10.0]), np.array([1.0, 10.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + (abs(y0) or 1.0) * 0.1
        y0 = y0 - (abs(y0) or 1.0) * 0.1

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def tx(v):
        f = (math.log10(v) - math.log10(x0)) / (math.log10(x1) - math.log10(x0)) if logx else (v - x0) / (x1 - x0)
        return MARGIN["left"] + f * pw

    def ty(v):
        f = (math.log10(v) - math.log10(y0)) / (math.log10(y1) - math.log10(y0)) if logy else (v - y0) / (y1 - y0)
        return MARGIN["top"] + (1.0 - f) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           'fill="none" stroke="black"/>']
    for v in _ticks(x0, x1, logx):
        px = tx(v)
        out.append(f'<line x1="{px:.2f}" y1="{MARGIN["top"] + ph}" x2="{px:.2f}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(y0, y1, logy):
        py = ty(v)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{py:.2f}" x2="{MARGIN["left"]}" '
                   f'y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(v)}</text>')
    for i, (label, (x, y)) in enumerate(cleaned.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{tx(a):.2f},{ty(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN["top"] + 14 + 16 * i
        lx = WIDTH - MARGIN["right"] + 10
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{lx + 25}" y="{ly}">{escape(str(label))}</text>')
    cx = MARGIN["left"] + pw / 2
    out.append(f'<text x="{cx:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    cy = MARGIN["top"] + ph / 2
    out.append(f'<text x="16" y="{cy:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {cy:.1f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{cx:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
