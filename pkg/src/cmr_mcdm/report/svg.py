"""Minimal, dependency-free SVG charts with deterministic output."""
from __future__ import annotations

import json
import math
from datetime import date, timedelta
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
NUDGE_PX = 7.0


def color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def _f(v: float) -> str:
    return f"{v:.2f}"


class Svg:
    def __init__(self, width: float, height: float, title: str = ""):
        self.width, self.height = width, height
        self.parts: list[str] = []
        self.title = title
        self.metadata: dict = {}

    def add(self, element: str) -> None:
        self.parts.append(element)

    def text(self, x, y, s, size=11, anchor="start", extra="") -> None:
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}"'
                 f'{" " + extra if extra else ""}>{escape(str(s))}</text>')

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, extra="") -> None:
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                 f'stroke="{stroke}" stroke-width="{width}"{" " + extra if extra else ""}/>')

    def render(self) -> str:
        head = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(self.width)}" '
            f'height="{_f(self.height)}" viewBox="0 0 {_f(self.width)} {_f(self.height)}">',
        ]
        if self.title:
            head.append(f"<title>{escape(self.title)}</title>")
        if self.metadata:
            meta = json.dumps(self.metadata, sort_keys=True, ensure_ascii=False)
            head.append(f"<metadata>{escape(meta)}</metadata>")
        head.append(f'<rect x="0" y="0" width="{_f(self.width)}" height="{_f(self.height)}" fill="#fff"/>')
        return "\n".join(head + self.parts + ["</svg>"]) + "\n"


def _legend(svg: Svg, x: float, y: float, names: Sequence[str], colors: Sequence[str]) -> None:
    for i, (name, c) in enumerate(zip(names, colors)):
        yy = y + 16 * i
        svg.add(f'<rect x="{_f(x)}" y="{_f(yy - 9)}" width="10" height="10" fill="{c}"/>')
        svg.text(x + 15, yy, name)


def radar_chart(names: Sequence[str], vectors: Sequence[Sequence[float]], axes: Sequence[str],
                title: str = "", metadata: dict | None = None) -> str:
    """One closed polygon per locality over the category axes.

    Radius grows linearly with the aggregated value, so a polygon nested
    inside another belongs to a locality that weakly dominates it.
    """
    k = len(axes)
    cx, cy, r_in, r_out = 230.0, 240.0, 18.0, 170.0
    values = [float(v) for vec in vectors for v in vec]
    lo, hi = (min(values), max(values)) if values else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5

    def radius(v: float) -> float:
        return r_in + (v - lo) / (hi - lo) * (r_out - r_in)

    def point(axis: int, r: float) -> tuple[float, float]:
        theta = -math.pi / 2 + 2 * math.pi * axis / k
        return cx + r * math.cos(theta), cy + r * math.sin(theta)

    svg = Svg(460 + 190, 500, title)
    svg.metadata = {
        "chart": "radar",
        "axes": list(axes),
        "radial_scale": {"min": lo, "max": hi, "inner_px": r_in, "outer_px": r_out,
                         "orientation": "radius increases with aggregated value; "
                                        "smaller radius = larger mobility reduction"},
        **(metadata or {}),
    }
    if title:
        svg.text(cx, 24, title, size=13, anchor="middle")
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        r = r_in + frac * (r_out - r_in)
        ring = " ".join(f"{_f(x)},{_f(y)}" for x, y in (point(a, r) for a in range(k)))
        svg.add(f'<polygon points="{ring}" fill="none" stroke="#ccc" stroke-width="0.6"/>')
        x, y = point(0, r)
        svg.text(x + 3, y - 2, f"{lo + frac * (hi - lo):.3g}", size=8)
    for a, label in enumerate(axes):
        x, y = point(a, r_out)
        svg.line(cx, cy, x, y, stroke="#999", width=0.6)
        lx, ly = point(a, r_out + 22)
        svg.text(lx, ly, label, size=10, anchor="middle")
    for i, (name, vec) in enumerate(zip(names, vectors)):
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in (point(a, radius(v)) for a, v in enumerate(vec)))
        vals = ",".join(repr(float(v)) for v in vec)
        svg.add(f'<polygon class="locality" data-name={quoteattr(name)} data-values="{vals}" '
                f'points="{pts}" fill="{color(i)}" fill-opacity="0.08" stroke="{color(i)}" '
                f'stroke-width="1.6"/>')
    _legend(svg, 470, 60, names, [color(i) for i in range(len(names))])
    return svg.render()


def parallel_coordinates(names: Sequence[str], depths: Sequence[Sequence[int]],
                         axis_labels: Sequence[str], title: str = "",
                         metadata: dict | None = None) -> str:
    """Dominance depth per period; one polyline per locality.

    Vertices sharing a (period, depth) are spread horizontally by a fixed
    offset in locality order.
    """
    n_axes = len(axis_labels)
    max_depth = max((d for row in depths for d in row), default=1)
    left, top, gap, step = 60.0, 50.0, 110.0, 48.0
    width = left * 2 + gap * max(n_axes - 1, 1) + 170
    height = top + step * max(max_depth - 1, 1) + 70

    def y_of(d: int) -> float:
        return top + (d - 1) * step

    svg = Svg(width, height, title)
    svg.metadata = {"chart": "parallel_coordinates", "axes": list(axis_labels),
                    "vertical": "dominance depth, 1 at top", "nudge_px": NUDGE_PX, **(metadata or {})}
    if title:
        svg.text(width / 2, 20, title, size=13, anchor="middle")
    for p, label in enumerate(axis_labels):
        x = left + gap * p
        svg.line(x, top - 10, x, y_of(max_depth) + 10, stroke="#999")
        svg.text(x, y_of(max_depth) + 30, label, anchor="middle")
    for d in range(1, max_depth + 1):
        svg.text(left - 30, y_of(d) + 4, d, anchor="end")

    offsets: list[list[float]] = [[0.0] * n_axes for _ in names]
    for p in range(n_axes):
        groups: dict[int, list[int]] = {}
        for i, row in enumerate(depths):
            groups.setdefault(row[p], []).append(i)
        for members in groups.values():
            m = len(members)
            for j, i in enumerate(members):
                offsets[i][p] = (j - (m - 1) / 2) * NUDGE_PX
    for i, (name, row) in enumerate(zip(names, depths)):
        pts = [(left + gap * p + offsets[i][p], y_of(d)) for p, d in enumerate(row)]
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        svg.add(f'<polyline class="locality" data-name={quoteattr(name)} '
                f'data-depths="{",".join(str(d) for d in row)}" points="{coords}" fill="none" '
                f'stroke="{color(i)}" stroke-width="2"/>')
        for x, y in pts:
            svg.add(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="3.5" fill="{color(i)}"/>')
    _legend(svg, left + gap * max(n_axes - 1, 1) + 40, top, names, [color(i) for i in range(len(names))])
    return svg.render()


def series_plot(lines: Sequence[tuple[str, Sequence[date], Sequence[float]]],
                restriction: date | None = None, relaxation: date | None = None,
                window: tuple[date, int] | None = None, title: str = "",
                metadata: dict | None = None) -> str:
    """Line chart of dated series with restriction/relaxation markers.

    ``window`` is ``(start, length_days)`` and is drawn as a shaded band.
    """
    left, right, top, bottom = 60.0, 190.0, 40.0, 50.0
    width, height = 820.0, 380.0
    all_dates = [d for _, ds, _ in lines for d in ds]
    all_vals = [float(v) for _, _, vs in lines for v in vs]
    if not all_dates:
        all_dates, all_vals = [restriction or date(2020, 2, 15)], [0.0]
    d0, d1 = min(all_dates), max(all_dates)
    if restriction:
        d0, d1 = min(d0, restriction), max(d1, restriction)
    if relaxation:
        d1 = max(d1, relaxation)
    span = max((d1 - d0).days, 1)
    lo, hi = min(all_vals), max(all_vals)
    if hi == lo:
        lo, hi = lo - 1, hi + 1
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    plot_w, plot_h = width - left - right, height - top - bottom

    def x_of(d: date) -> float:
        return left + (d - d0).days / span * plot_w

    def y_of(v: float) -> float:
        return top + (hi - v) / (hi - lo) * plot_h

    svg = Svg(width, height, title)
    svg.metadata = {"chart": "series", "restriction": restriction.isoformat() if restriction else None,
                    "relaxation": relaxation.isoformat() if relaxation else None,
                    "window": [window[0].isoformat(), window[1]] if window else None, **(metadata or {})}
    if title:
        svg.text(width / 2, 20, title, size=13, anchor="middle")
    if window:
        x0 = x_of(window[0])
        x1 = x_of(window[0] + timedelta(days=window[1] - 1))
        svg.add(f'<rect class="window" x="{_f(x0)}" y="{_f(top)}" width="{_f(x1 - x0)}" '
                f'height="{_f(plot_h)}" fill="#888" fill-opacity="0.15"/>')
    svg.line(left, top + plot_h, left + plot_w, top + plot_h)
    svg.line(left, top, left, top + plot_h)
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = lo + frac * (hi - lo)
        svg.text(left - 6, y_of(v) + 4, f"{v:.3g}", size=9, anchor="end")
    if lo < 0 < hi:
        svg.line(left, y_of(0), left + plot_w, y_of(0), stroke="#bbb", width=0.5)
    month = date(d0.year, d0.month, 1)
    while month <= d1:
        if month >= d0:
            svg.text(x_of(month), top + plot_h + 16, month.strftime("%Y-%m"), size=9, anchor="middle")
        month = date(month.year + month.month // 12, month.month % 12 + 1, 1)
    for cls, marker in (("restriction", restriction), ("relaxation", relaxation)):
        if marker:
            svg.line(x_of(marker), top, x_of(marker), top + plot_h, stroke="#333", width=1.0,
                     extra=f'stroke-dasharray="5,4" class="marker {cls}"')
    for i, (name, ds, vs) in enumerate(lines):
        pts = " ".join(f"{_f(x_of(d))},{_f(y_of(float(v)))}" for d, v in zip(ds, vs))
        svg.add(f'<polyline class="series" data-name={quoteattr(name)} points="{pts}" fill="none" '
                f'stroke="{color(i)}" stroke-width="1.3"/>')
    _legend(svg, width - right + 15, top + 10, [n for n, _, _ in lines], [color(i) for i in range(len(lines))])
    return svg.render()
