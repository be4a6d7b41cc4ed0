"""Minimal static SVG line charts, no plotting dependency."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH = 720
HEIGHT = 480
MARGIN_LEFT = 78
MARGIN_RIGHT = 24
MARGIN_TOP = 34
MARGIN_BOTTOM = 58


@dataclass
class Series:
    label: str
    xs: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    line: bool = True
    marker: bool = False


def _nice_step(span: float) -> float:
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _linear_ticks(lo: float, hi: float) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + step * 1e-9:
        ticks.append(0.0 if abs(value) < step * 1e-9 else value)
        value += step
    return ticks


def _decade_ticks(lo: float, hi: float) -> list[float]:
    ticks = []
    exp = math.floor(math.log10(lo))
    while 10.0 ** exp <= hi * (1 + 1e-9):
        if 10.0 ** exp >= lo * (1 - 1e-9):
            ticks.append(10.0 ** exp)
        exp += 1
    return ticks or [lo, hi]


def _fmt(value: float) -> str:
    return f"{value:g}"


def line_chart(series: list[Series], xlabel: str, ylabel: str,
               title: str = "", log_x: bool = False) -> str:
    """Render series to a self-contained SVG document string."""
    xs = [x for s in series for x in s.xs]
    ys = [y for s in series for y in s.ys]
    if not xs or not ys:
        xs, ys = [0.0, 1.0], [0.0, 1.0]

    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if log_x:
        x_lo = max(x_lo, 1e-12)
        x_hi = max(x_hi, x_lo * 10)
    elif x_hi <= x_lo:
        x_hi = x_lo + 1.0
    pad = (y_hi - y_lo) * 0.05 or max(abs(y_hi), 1.0) * 0.05
    y_lo, y_hi = y_lo - pad, y_hi + pad
    if y_lo > 0 and y_lo < (y_hi - y_lo):
        y_lo = 0.0   # anchor near-zero baselines at zero

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def x_px(x: float) -> float:
        if log_x:
            frac = (math.log10(x) - math.log10(x_lo)) / (
                math.log10(x_hi) - math.log10(x_lo))
        else:
            frac = (x - x_lo) / (x_hi - x_lo)
        return MARGIN_LEFT + frac * plot_w

    def y_px(y: float) -> float:
        frac = (y - y_lo) / (y_hi - y_lo)
        return MARGIN_TOP + (1.0 - frac) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )

    x_ticks = _decade_ticks(x_lo, x_hi) if log_x else _linear_ticks(x_lo, x_hi)
    for tick in x_ticks:
        px = x_px(tick)
        out.append(
            f'<line x1="{px:.1f}" y1="{MARGIN_TOP}" x2="{px:.1f}" '
            f'y2="{MARGIN_TOP + plot_h}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{px:.1f}" y="{MARGIN_TOP + plot_h + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{_fmt(tick)}</text>'
        )
    for tick in _linear_ticks(y_lo, y_hi):
        py = y_px(tick)
        out.append(
            f'<line x1="{MARGIN_LEFT}" y1="{py:.1f}" '
            f'x2="{MARGIN_LEFT + plot_w}" y2="{py:.1f}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(tick)}</text>'
        )

    # frame
    out.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333333"/>'
    )
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 14}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">'
        f'{xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.1f}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.1f})">'
        f'{ylabel}</text>'
    )

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = [(x_px(x), y_px(y)) for x, y in zip(s.xs, s.ys)]
        if s.line and len(points) >= 2:
            path = " ".join(f"{px:.1f},{py:.1f}" for px, py in points)
            out.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" '
                f'stroke-width="1.6"/>'
            )
        if s.marker or len(points) == 1:
            for px, py in points:
                out.append(
                    f'<circle cx="{px:.1f}" cy="{py:.1f}" r="3" '
                    f'fill="{color}"/>'
                )
        legend_y = MARGIN_TOP + 14 + 16 * i
        legend_x = MARGIN_LEFT + plot_w - 150
        out.append(
            f'<line x1="{legend_x}" y1="{legend_y - 4}" x2="{legend_x + 22}" '
            f'y2="{legend_y - 4}" stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{legend_x + 28}" y="{legend_y}" '
            f'font-family="sans-serif" font-size="11">{s.label}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
