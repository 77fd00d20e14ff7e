"""Native SVG rendering of contour heat-grids (no plotting dependency).

Fixed 800x600 canvas, an 8-step viridis-like discrete palette for cell
values, and the level-1 isoline drawn as black polylines. Output is a plain
string built deterministically, so a fixed grid renders byte-identically.
"""

from __future__ import annotations

import numpy as np

CANVAS_W, CANVAS_H = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 90, 40, 60

# 8 steps sampled from the viridis ramp
PALETTE = ("#440154", "#46327e", "#365c8d", "#277f8e",
           "#1fa187", "#4ac16d", "#a0da39", "#fde725")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _color(value: float, lo: float, hi: float) -> str:
    if not np.isfinite(value):
        return "#bbbbbb"
    if hi <= lo:
        return PALETTE[0]
    t = (value - lo) / (hi - lo)
    idx = min(int(t * len(PALETTE)), len(PALETTE) - 1)
    return PALETTE[max(idx, 0)]


def render_heatmap_svg(param_vals, s_vals, z: np.ndarray, isoline,
                       param_label: str, s_label: str,
                       title: str = "") -> str:
    """SVG heat-grid of z[i, j] over (param_vals[i], s_vals[j]) + isoline.

    Cells are drawn on the rectilinear grid (cell k spans midpoints of its
    neighbours); the isoline polylines are in the same data coordinates.
    """
    param_vals = np.asarray(param_vals, dtype=float)
    s_vals = np.asarray(s_vals, dtype=float)
    z = np.asarray(z, dtype=float)
    finite = z[np.isfinite(z)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0

    def edges(vals):
        mids = (vals[:-1] + vals[1:]) / 2
        first = vals[0] - (mids[0] - vals[0]) if len(vals) > 1 else vals[0] - 0.5
        last = vals[-1] + (vals[-1] - mids[-1]) if len(vals) > 1 else vals[-1] + 0.5
        return np.concatenate([[first], mids, [last]])

    xe, ye = edges(param_vals), edges(s_vals)
    plot_w = CANVAS_W - MARGIN_L - MARGIN_R
    plot_h = CANVAS_H - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - xe[0]) / (xe[-1] - xe[0]) * plot_w

    def sy(y):
        return CANVAS_H - MARGIN_B - (y - ye[0]) / (ye[-1] - ye[0]) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" '
           f'height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}">',
           f'<rect width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>']
    if title:
        out.append(f'<text x="{CANVAS_W / 2:.0f}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="16">{title}</text>')
    for i in range(len(param_vals)):
        for j in range(len(s_vals)):
            x0, x1 = sx(xe[i]), sx(xe[i + 1])
            y0, y1 = sy(ye[j + 1]), sy(ye[j])
            out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" '
                       f'width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}" '
                       f'fill="{_color(z[i, j], lo, hi)}"/>')
    for line in isoline:
        pts = " ".join(f"{_fmt(sx(p))},{_fmt(sy(q))}" for p, q in line)
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" '
                   'stroke-width="2"/>')
    # axes
    ax_y = CANVAS_H - MARGIN_B
    out.append(f'<line x1="{MARGIN_L}" y1="{ax_y}" x2="{CANVAS_W - MARGIN_R}" '
               f'y2="{ax_y}" stroke="black"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
               f'y2="{ax_y}" stroke="black"/>')
    for x in _ticks(xe[0], xe[-1]):
        out.append(f'<line x1="{_fmt(sx(x))}" y1="{ax_y}" x2="{_fmt(sx(x))}" '
                   f'y2="{ax_y + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(sx(x))}" y="{ax_y + 20}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{x:g}</text>')
    for y in _ticks(ye[0], ye[-1]):
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(sy(y))}" x2="{MARGIN_L}" '
                   f'y2="{_fmt(sy(y))}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(sy(y) + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="12">{y:g}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="{CANVAS_H - 15}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="14">'
               f'{param_label}</text>')
    out.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="14" '
               f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2:.0f})">{s_label}</text>')
    # discrete color legend
    leg_x = CANVAS_W - MARGIN_R + 20
    leg_h = plot_h / len(PALETTE)
    for k, color in enumerate(PALETTE):
        y0 = ax_y - (k + 1) * leg_h
        out.append(f'<rect x="{leg_x}" y="{_fmt(y0)}" width="18" '
                   f'height="{_fmt(leg_h)}" fill="{color}"/>')
        val = lo + (hi - lo) * k / len(PALETTE)
        out.append(f'<text x="{leg_x + 24}" y="{_fmt(y0 + leg_h)}" '
                   f'font-family="sans-serif" font-size="11">{val:.2g}</text>')
    out.append(f'<text x="{leg_x + 24}" y="{_fmt(ax_y - plot_h)}" '
               f'font-family="sans-serif" font-size="11">{hi:.2g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** np.floor(np.log10(span / target))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= target:
            step *= mult
            break
    first = np.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(round(t, 10))
        t += step
    return ticks
