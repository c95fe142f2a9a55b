"""Minimal standalone SVG line and step charts (no plotting library needed)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

_COLORS = ("#1f4fbf", "#c2185b", "#d32f2f", "#222222", "#2e7d32", "#ef6c00")
W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 55


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag * 10)
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def line_chart(series: dict[str, list[tuple[float, float]]], title: str, xlabel: str,
               ylabel: str, step: bool = False) -> str:
    """Render ``{name: [(x, y), ...]}`` as SVG text. Non-finite points are skipped."""
    pts = [(x, y) for s in series.values() for x, y in s if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(0.0, min(p[1] for p in pts)), max(p[1] for p in pts)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pw, ph = W - ML - MR, H - MT - MB

    def sx(x):
        return ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MT + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{MT + ph}" x2="{sx(t):.2f}" y2="{MT + ph + 4}" stroke="#888"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{MT + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ML - 4}" y1="{sy(t):.2f}" x2="{ML}" y2="{sy(t):.2f}" stroke="#888"/>')
        out.append(f'<text x="{ML - 7}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ML + pw / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MT + ph / 2})">{escape(ylabel)}</text>')
    for i, (name, s) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        seg = [(x, y) for x, y in s if math.isfinite(x) and math.isfinite(y)]
        if seg:
            coords = []
            for j, (x, y) in enumerate(seg):
                if step and j:
                    coords.append(f"{sx(x):.2f},{sy(seg[j - 1][1]):.2f}")
                coords.append(f"{sx(x):.2f},{sy(y):.2f}")
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" '
                       f'points="{" ".join(coords)}"/>')
        ly = MT + 14 + 16 * i
        out.append(f'<line x1="{ML + 10}" y1="{ly - 4}" x2="{ML + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ML + 36}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
