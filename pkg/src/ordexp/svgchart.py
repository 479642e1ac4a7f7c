"""Minimal deterministic SVG line charts (no plotting dependency).

Output depends only on the input data, so charts can be diffed in tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
DASHES = ("", "6,3", "2,2", "8,3,2,3")


@dataclass
class Panel:
    title: str
    series: dict = field(default_factory=dict)  # name -> list of (x, y)
    xlabel: str = "eta"
    ylabel: str = "RRI (%)"


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    raw = (hi - lo) / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.floor(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    if ticks[-1] < hi:
        ticks.append(round(v, 12))
    return ticks


def _num(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _tick_label(v: float) -> str:
    return f"{v:g}"


def _panel_svg(panel: Panel, x0: float, y0: float, w: float, h: float) -> list[str]:
    pad_l, pad_r, pad_t, pad_b = 56, 120, 28, 40
    pts = [p for s in panel.series.values() for p in s if math.isfinite(p[1])]
    out = ['<g class="panel">',
           f'<text x="{_num(x0 + pad_l + (w - pad_l - pad_r) / 2)}" y="{_num(y0 + 18)}" '
           f'text-anchor="middle" font-size="13">{escape(panel.title)}</text>']
    if not pts:
        out.append("</g>")
        return out
    xt = nice_ticks(min(p[0] for p in pts), max(p[0] for p in pts))
    yt = nice_ticks(min(p[1] for p in pts), max(p[1] for p in pts))
    xmin, xmax, ymin, ymax = xt[0], xt[-1], yt[0], yt[-1]
    left, right = x0 + pad_l, x0 + w - pad_r
    top, bottom = y0 + pad_t, y0 + h - pad_b

    def sx(x):
        return left + (x - xmin) / (xmax - xmin) * (right - left)

    def sy(y):
        return bottom - (y - ymin) / (ymax - ymin) * (bottom - top)

    out.append(f'<rect x="{_num(left)}" y="{_num(top)}" width="{_num(right - left)}" '
               f'height="{_num(bottom - top)}" fill="none" stroke="#000"/>')
    for t in xt:
        x = sx(t)
        out.append(f'<line x1="{_num(x)}" y1="{_num(bottom)}" x2="{_num(x)}" y2="{_num(bottom + 4)}" stroke="#000"/>')
        out.append(f'<text x="{_num(x)}" y="{_num(bottom + 16)}" text-anchor="middle" font-size="10">{_tick_label(t)}</text>')
    for t in yt:
        y = sy(t)
        out.append(f'<line x1="{_num(left - 4)}" y1="{_num(y)}" x2="{_num(left)}" y2="{_num(y)}" stroke="#000"/>')
        out.append(f'<text x="{_num(left - 6)}" y="{_num(y + 3)}" text-anchor="end" font-size="10">{_tick_label(t)}</text>')
    if ymin < 0 < ymax:
        out.append(f'<line x1="{_num(left)}" y1="{_num(sy(0))}" x2="{_num(right)}" y2="{_num(sy(0))}" '
                   f'stroke="#999" stroke-dasharray="3,3"/>')
    out.append(f'<text x="{_num((left + right) / 2)}" y="{_num(bottom + 32)}" text-anchor="middle" '
               f'font-size="11">{escape(panel.xlabel)}</text>')
    cy = (top + bottom) / 2
    out.append(f'<text x="{_num(x0 + 14)}" y="{_num(cy)}" text-anchor="middle" font-size="11" '
               f'transform="rotate(-90 {_num(x0 + 14)} {_num(cy)})">{escape(panel.ylabel)}</text>')
    for i, (name, data) in enumerate(panel.series.items()):
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[(i // len(PALETTE)) % len(DASHES)]
        pts_s = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in data if math.isfinite(y))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{extra} points="{pts_s}"/>')
        ly = top + 6 + 16 * i
        out.append(f'<line x1="{_num(right + 10)}" y1="{_num(ly)}" x2="{_num(right + 30)}" y2="{_num(ly)}" '
                   f'stroke="{color}" stroke-width="1.5"{extra}/>')
        out.append(f'<text x="{_num(right + 34)}" y="{_num(ly + 4)}" font-size="10">{escape(name)}</text>')
    out.append("</g>")
    return out


def render(panels: list[Panel], columns: int = 2, panel_width: int = 480,
           panel_height: int = 300, title: str | None = None) -> str:
    """Standalone SVG document with the panels laid out on a grid."""
    columns = max(1, min(columns, len(panels) or 1))
    rows = max(1, math.ceil(len(panels) / columns))
    head = 30 if title else 0
    width, height = columns * panel_width, rows * panel_height + head
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
           f'<rect width="{width}" height="{height}" fill="#fff"/>']
    if title:
        out.append(f'<text x="{width / 2:g}" y="20" text-anchor="middle" font-size="15">{escape(title)}</text>')
    for i, panel in enumerate(panels):
        r, c = divmod(i, columns)
        out.extend(_panel_svg(panel, c * panel_width, head + r * panel_height, panel_width, panel_height))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def rri_panels(rows) -> list[Panel]:
    """One panel per (target, loss) from RiskRow-like records; baselines omitted."""
    from .mcrisk import BASELINE, TARGET_OF

    panels: dict = {}
    for r in rows:
        target = TARGET_OF.get(r.estimator, "sigma1")
        if r.estimator in BASELINE.values():
            continue
        key = (target, r.loss)
        if key not in panels:
            panels[key] = Panel(f"RRI vs BAEE, {target}^{r.k:g}, {r.loss} loss")
        panels[key].series.setdefault(r.estimator, []).append((r.eta, r.rri))
    for p in panels.values():
        for s in p.series.values():
            s.sort()
    return list(panels.values())
