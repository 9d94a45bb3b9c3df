"""Minimal deterministic SVG line plot for witness curves."""
from __future__ import annotations

from typing import Dict, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=70, right=130, top=30, bottom=55)

COLORS = {"W_N": "#d62728", "W_NS": "#1f77b4", "W_NSB": "#2ca02c"}
LABELS = {"W_N": "Newton", "W_NS": "Newton-Schrodinger", "W_NSB": "Newton-Schrodinger-Bohm"}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 6) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10) * mag
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step * 1e-9, step)


def witness_svg(
    t: np.ndarray,
    curves: Dict[str, np.ndarray],
    guide_t: Optional[float] = 2.0,
    title: str = "Entanglement witness",
    metadata: str = "",
) -> str:
    """Render ``curves`` (column name -> values) against ``t``.

    Draws axes with ticks, a dashed zero line, an optional dotted vertical
    guide at ``guide_t`` and a legend. Output depends only on the inputs.
    """
    t = np.asarray(t, float)
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    t_lo, t_hi = float(t.min()), float(t.max())
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    values = np.concatenate([np.asarray(v, float) for v in curves.values()] + [np.zeros(1)])
    w_lo, w_hi = float(values.min()), float(values.max())
    pad = 0.05 * (w_hi - w_lo or 1.0)
    w_lo, w_hi = w_lo - pad, w_hi + pad

    def sx(v):
        return x0 + (np.asarray(v) - t_lo) / (t_hi - t_lo) * (x1 - x0)

    def sy(v):
        return y0 - (np.asarray(v) - w_lo) / (w_hi - w_lo) * (y0 - y1)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(title)}</title>",
    ]
    if metadata:
        out.append(f"<metadata>{escape(metadata)}</metadata>")
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')

    for tick in _nice_ticks(t_lo, t_hi):
        px = _fmt(sx(tick))
        out.append(f'<line x1="{px}" y1="{y0}" x2="{px}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{y0 + 18}" text-anchor="middle">{tick:g}</text>')
    for tick in _nice_ticks(w_lo, w_hi):
        py = _fmt(sy(tick))
        out.append(f'<line x1="{x0 - 5}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{py}" text-anchor="end" dominant-baseline="middle">{tick:g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">t (s)</text>')
    out.append(
        f'<text x="18" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">W</text>'
    )

    zy = _fmt(sy(0.0))
    out.append(f'<line x1="{x0}" y1="{zy}" x2="{x1}" y2="{zy}" stroke="gray" stroke-dasharray="6 4"/>')
    if guide_t is not None and t_lo < guide_t < t_hi:
        gx = _fmt(sx(guide_t))
        out.append(f'<line x1="{gx}" y1="{y1}" x2="{gx}" y2="{y0}" stroke="gray" stroke-dasharray="2 3"/>')

    for i, (name, vals) in enumerate(curves.items()):
        color = COLORS.get(name, "black")
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(sx(t), sy(np.asarray(vals, float))))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = y1 + 15 + 20 * i
        out.append(f'<line x1="{x1 + 10}" y1="{ly}" x2="{x1 + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x1 + 35}" y="{ly}" dominant-baseline="middle">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def columns_for(models: Sequence[str]):
    return [f"W_{m}" for m in models]
