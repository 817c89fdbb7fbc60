"""Minimal deterministic SVG log-log plotting (no plotting library, no
timestamps, stable byte output for golden tests)."""

from __future__ import annotations

import math
from dataclasses import dataclass

PALETTE = ("#1b6ca8", "#d1495b", "#3a7d44", "#8d5a97", "#c77d1e", "#2b2d42")
MARKERS = ("circle", "square", "diamond", "triangle", "circle", "square")


@dataclass(frozen=True)
class SeriesSpec:
    label: str
    xs: list
    ys: list
    slope: float | None = None


@dataclass(frozen=True)
class PanelSpec:
    title: str
    series: list


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _marker(kind: str, x: float, y: float, color: str) -> str:
    s = 3.2
    if kind == "square":
        return (f'<rect x="{_fmt(x - s)}" y="{_fmt(y - s)}" width="{_fmt(2 * s)}" '
                f'height="{_fmt(2 * s)}" fill="{color}"/>')
    if kind == "diamond":
        pts = f"{_fmt(x)},{_fmt(y - s)} {_fmt(x + s)},{_fmt(y)} {_fmt(x)},{_fmt(y + s)} {_fmt(x - s)},{_fmt(y)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    if kind == "triangle":
        pts = f"{_fmt(x)},{_fmt(y - s)} {_fmt(x + s)},{_fmt(y + s)} {_fmt(x - s)},{_fmt(y + s)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(s)}" fill="{color}"/>'


def _panel_svg(panel: PanelSpec, ox: float, oy: float, width: float, height: float) -> list[str]:
    xs_all = [x for s in panel.series for x in s.xs]
    ys_all = [y for s in panel.series for y in s.ys if y > 0.0]
    if not xs_all or not ys_all:
        raise ValueError("panel has no positive data")
    lx_min, lx_max = math.log10(min(xs_all)), math.log10(max(xs_all))
    ly_min = math.floor(math.log10(min(ys_all)))
    ly_max = math.ceil(math.log10(max(ys_all)))
    if lx_max == lx_min:
        lx_max = lx_min + 1.0
    if ly_max == ly_min:
        ly_max = ly_min + 1

    def px(x):
        return ox + (math.log10(x) - lx_min) / (lx_max - lx_min) * width

    def py(y):
        return oy + height - (math.log10(y) - ly_min) / (ly_max - ly_min) * height

    out = [
        f'<rect x="{_fmt(ox)}" y="{_fmt(oy)}" width="{_fmt(width)}" height="{_fmt(height)}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
        f'<text x="{_fmt(ox + width / 2)}" y="{_fmt(oy - 8)}" text-anchor="middle" '
        f'font-size="13" fill="#111111">{panel.title}</text>',
    ]
    # y decade gridlines and labels
    for dec in range(int(ly_min), int(ly_max) + 1):
        y = py(10.0**dec)
        out.append(
            f'<line x1="{_fmt(ox)}" y1="{_fmt(y)}" x2="{_fmt(ox + width)}" y2="{_fmt(y)}" '
            'stroke="#dddddd" stroke-width="0.6"/>'
        )
        out.append(
            f'<text x="{_fmt(ox - 6)}" y="{_fmt(y + 3.5)}" text-anchor="end" '
            f'font-size="10" fill="#333333">1e{dec}</text>'
        )
    # x ticks at the data points of the first series
    for x in sorted(set(panel.series[0].xs)):
        xp = px(x)
        out.append(
            f'<line x1="{_fmt(xp)}" y1="{_fmt(oy + height)}" x2="{_fmt(xp)}" '
            f'y2="{_fmt(oy + height + 4)}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(xp)}" y="{_fmt(oy + height + 15)}" text-anchor="middle" '
            f'font-size="10" fill="#333333">{x:g}</text>'
        )
    out.append(
        f'<text x="{_fmt(ox + width / 2)}" y="{_fmt(oy + height + 30)}" text-anchor="middle" '
        'font-size="11" fill="#111111">N (points per direction)</text>'
    )
    for idx, series in enumerate(panel.series):
        color = PALETTE[idx % len(PALETTE)]
        marker = MARKERS[idx % len(MARKERS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(series.xs, series.ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>'
        )
        for x, y in zip(series.xs, series.ys):
            out.append(_marker(marker, px(x), py(y), color))
    return out


def loglog_svg(panels: list[PanelSpec], title: str = "", panel_width: float = 330.0,
               panel_height: float = 260.0) -> str:
    """Render panels side by side with a shared legend; byte-deterministic."""
    margin_l, margin_t, gap = 60.0, 50.0, 60.0
    legend_w = 190.0
    n = len(panels)
    width = margin_l + n * panel_width + (n - 1) * gap + legend_w + 20.0
    height = margin_t + panel_height + 70.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        f'<rect width="{width:g}" height="{height:g}" fill="#ffffff"/>',
    ]
    if title:
        out.append(
            f'<text x="{_fmt(width / 2)}" y="20" text-anchor="middle" font-size="15" '
            f'fill="#111111">{title}</text>'
        )
    for i, panel in enumerate(panels):
        ox = margin_l + i * (panel_width + gap)
        out.extend(_panel_svg(panel, ox, margin_t, panel_width, panel_height))
    # legend with slope annotations, from the first panel's series
    lx = margin_l + n * panel_width + (n - 1) * gap + 20.0
    ly = margin_t + 10.0
    out.append(
        f'<text x="{_fmt(lx)}" y="{_fmt(ly - 4)}" font-size="11" fill="#111111">series (fitted order)</text>'
    )
    for idx, series in enumerate(panels[0].series):
        color = PALETTE[idx % len(PALETTE)]
        y = ly + 16.0 * (idx + 1)
        out.append(
            f'<line x1="{_fmt(lx)}" y1="{_fmt(y - 3)}" x2="{_fmt(lx + 18)}" y2="{_fmt(y - 3)}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        label = series.label
        if series.slope is not None:
            label += f" ({series.slope:.2f})"
        out.append(
            f'<text x="{_fmt(lx + 24)}" y="{_fmt(y)}" font-size="10" fill="#333333">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
