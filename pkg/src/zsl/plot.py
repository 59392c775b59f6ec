"""Minimal self-contained SVG line charts (linear or log-log axes)."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
W, H = 640, 420
ML, MR, MT, MB = 80, 150, 40, 55


def _fmt(v: float) -> str:
    return format(v, ".3g")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(series: dict[str, tuple[Sequence[float], Sequence[float]]], *,
               title: str = "", xlabel: str = "", ylabel: str = "", loglog: bool = False) -> str:
    """Render named (x, y) series to an SVG document string.

    Non-finite points (and non-positive ones on log axes) are dropped.
    """
    tf = (lambda v: math.log10(v)) if loglog else (lambda v: v)
    clean: dict[str, list[tuple[float, float]]] = {}
    for name, (xs, ys) in series.items():
        pts = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if loglog and (x <= 0 or y <= 0):
                continue
            pts.append((tf(x), tf(y)))
        clean[name] = pts
    allp = [p for pts in clean.values() for p in pts]
    if allp:
        x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
        y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        pad = abs(y0) * 0.1 or 0.5
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = W - ML - MR, H - MT - MB

    def sx(x):
        return ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MT + ph - (y - y0) / (y1 - y0) * ph

    def label(v):
        return _fmt(10 ** v) if loglog else _fmt(v)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{MT + ph}" x2="{X:.2f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{MT + ph + 18}" text-anchor="middle">{label(t)}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{ML - 5}" y1="{Y:.2f}" x2="{ML}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{Y + 4:.2f}" text-anchor="end">{label(t)}</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{ML + pw / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{MT + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {MT + ph / 2})">{escape(ylabel)}</text>')
    for i, (name, pts) in enumerate(clean.items()):
        col = PALETTE[i % len(PALETTE)]
        if pts:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{path}"/>')
            if len(pts) <= 40:
                out.extend(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{col}"/>' for x, y in pts)
        ly = MT + 16 * i + 10
        out.append(f'<line x1="{W - MR + 10}" y1="{ly}" x2="{W - MR + 30}" y2="{ly}" stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{W - MR + 35}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
