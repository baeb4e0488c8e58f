"""Minimal deterministic SVG charts.

Hand-rolled rather than delegated to a plotting library so that identical
input data always produces byte-identical files: no timestamps, no random
element ids, fixed float formatting throughout.  Supports exactly what the
report module needs: categorical X axes, linear or log10 Y axes, line series
with point markers, and grouped bars.
"""

from __future__ import annotations

import math

WIDTH = 840
HEIGHT = 520
MARGIN_LEFT = 84
MARGIN_RIGHT = 28
MARGIN_TOP = 56
MARGIN_BOTTOM = 72

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

_FONT = 'font-family="Helvetica,Arial,sans-serif"'


class ChartDataError(ValueError):
    """The series contain no drawable values."""


def _tick_label(value: float) -> str:
    if value >= 1.0:
        return str(int(round(value)))
    return f"{value:g}"


def _nice_step(span: float) -> float:
    raw = span / 5.0
    magnitude = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * magnitude:
            return mult * magnitude
    return 10.0 * magnitude


def _linear_axis(values: list[float]) -> tuple[float, float, list[float]]:
    top = max(values)
    if top <= 0.0:
        top = 1.0
    top *= 1.1
    step = _nice_step(top)
    ticks = [0.0]
    while ticks[-1] < top:  # last tick must clear the data maximum
        ticks.append(ticks[-1] + step)
    return 0.0, ticks[-1], ticks


def _log_axis(values: list[float]) -> tuple[float, float, list[float]]:
    positives = [v for v in values if v > 0.0]
    if not positives:
        raise ChartDataError("log axis requires at least one positive value")
    lo = min(positives) / 2.0  # clamp: smallest positive datum over two
    hi = max(positives) * 1.5
    ticks = [10.0 ** k
             for k in range(math.floor(math.log10(lo)),
                            math.ceil(math.log10(hi)) + 1)]
    return lo, hi, ticks


class _Canvas:
    def __init__(self, title: str, x_label: str, y_label: str):
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<text x="{WIDTH / 2:.0f}" y="30" text-anchor="middle" '
            f'{_FONT} font-size="18" fill="#111111">{_esc(title)}</text>',
        ]
        self.plot_left = MARGIN_LEFT
        self.plot_right = WIDTH - MARGIN_RIGHT
        self.plot_top = MARGIN_TOP
        self.plot_bottom = HEIGHT - MARGIN_BOTTOM
        self.plot_w = self.plot_right - self.plot_left
        self.plot_h = self.plot_bottom - self.plot_top
        cx = self.plot_left + self.plot_w / 2
        self.parts.append(
            f'<text x="{cx:.0f}" y="{HEIGHT - 18}" text-anchor="middle" '
            f'{_FONT} font-size="14" fill="#111111">{_esc(x_label)}</text>'
        )
        cy = self.plot_top + self.plot_h / 2
        self.parts.append(
            f'<text x="22" y="{cy:.0f}" text-anchor="middle" {_FONT} '
            f'font-size="14" fill="#111111" '
            f'transform="rotate(-90 22 {cy:.0f})">{_esc(y_label)}</text>'
        )

    def y_of(self, value: float, lo: float, hi: float, log: bool) -> float:
        if log:
            frac = (math.log10(value) - math.log10(lo)) / (
                math.log10(hi) - math.log10(lo))
        else:
            frac = (value - lo) / (hi - lo)
        return self.plot_bottom - frac * self.plot_h

    def x_of(self, index: int, count: int) -> float:
        slot = self.plot_w / count
        return self.plot_left + slot * (index + 0.5)

    def draw_y_grid(self, ticks: list[float], lo: float, hi: float,
                    log: bool) -> None:
        for tick in ticks:
            if tick < lo - 1e-12 or tick > hi * (1.0 + 1e-12):
                continue
            y = self.y_of(tick, lo, hi, log) if tick > 0 or not log else None
            if y is None:
                continue
            self.parts.append(
                f'<line x1="{self.plot_left}" y1="{y:.2f}" '
                f'x2="{self.plot_right}" y2="{y:.2f}" stroke="#dddddd" '
                f'stroke-width="1"/>'
            )
            self.parts.append(
                f'<text x="{self.plot_left - 8}" y="{y + 4:.2f}" '
                f'text-anchor="end" {_FONT} font-size="12" '
                f'fill="#333333">{_tick_label(tick)}</text>'
            )

    def draw_x_labels(self, labels: list[str]) -> None:
        for i, label in enumerate(labels):
            x = self.x_of(i, len(labels))
            self.parts.append(
                f'<text x="{x:.2f}" y="{self.plot_bottom + 20}" '
                f'text-anchor="middle" {_FONT} font-size="12" '
                f'fill="#333333">{_esc(label)}</text>'
            )

    def draw_axes(self) -> None:
        self.parts.append(
            f'<line x1="{self.plot_left}" y1="{self.plot_top}" '
            f'x2="{self.plot_left}" y2="{self.plot_bottom}" '
            f'stroke="#333333" stroke-width="1.5"/>'
        )
        self.parts.append(
            f'<line x1="{self.plot_left}" y1="{self.plot_bottom}" '
            f'x2="{self.plot_right}" y2="{self.plot_bottom}" '
            f'stroke="#333333" stroke-width="1.5"/>'
        )

    def draw_legend(self, entries: list[tuple[str, str]]) -> None:
        if not entries:
            return
        box_w = 16 + 10 * max(len(name) for name, _ in entries) + 24
        x0 = self.plot_right - box_w - 8
        y0 = self.plot_top + 8
        box_h = 22 * len(entries) + 8
        self.parts.append(
            f'<rect x="{x0}" y="{y0}" width="{box_w}" height="{box_h}" '
            f'fill="#ffffff" stroke="#cccccc" stroke-width="1"/>'
        )
        for i, (name, color) in enumerate(entries):
            y = y0 + 16 + 22 * i
            self.parts.append(
                f'<rect x="{x0 + 8}" y="{y - 9}" width="14" height="10" '
                f'fill="{color}"/>'
            )
            self.parts.append(
                f'<text x="{x0 + 28}" y="{y}" {_FONT} font-size="13" '
                f'fill="#111111">{_esc(name)}</text>'
            )

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts) + "\n"


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


Series = tuple[str, list[float | None]]


def _axis_for(series: list[Series], log_y: bool):
    """Axis bounds and ticks; a placeholder range when nothing is drawable
    (an all-absent column must still yield a valid, empty figure)."""
    values = [v for _, vals in series for v in vals if v is not None]
    if not values:
        values = [1.0, 10.0]
    return _log_axis(values) if log_y else _linear_axis(values)


def _no_data_note(canvas: _Canvas, series: list[Series]) -> bool:
    if any(v is not None for _, vals in series for v in vals):
        return False
    canvas.parts.append(
        f'<text x="{canvas.plot_left + canvas.plot_w / 2:.0f}" '
        f'y="{canvas.plot_top + canvas.plot_h / 2:.0f}" '
        f'text-anchor="middle" {_FONT} font-size="14" '
        f'fill="#888888">no data</text>'
    )
    return True


def render_line_chart(title: str, x_label: str, y_label: str,
                      x_labels: list[str], series: list[Series],
                      log_y: bool = False) -> str:
    """Point-marked line chart over categorical X positions.

    None values break the line; series with no values are omitted from the
    plot and the legend.
    """
    lo, hi, ticks = _axis_for(series, log_y)
    canvas = _Canvas(title, x_label, y_label)
    canvas.draw_y_grid(ticks, lo, hi, log_y)
    canvas.draw_axes()
    canvas.draw_x_labels(x_labels)
    if _no_data_note(canvas, series):
        return canvas.finish()

    legend = []
    for s_idx, (name, values) in enumerate(series):
        if all(v is None for v in values):
            continue
        color = PALETTE[s_idx % len(PALETTE)]
        legend.append((name, color))
        points = [
            (canvas.x_of(i, len(x_labels)), canvas.y_of(v, lo, hi, log_y))
            for i, v in enumerate(values) if v is not None
        ]
        runs: list[list[tuple[float, float]]] = []
        run: list[tuple[float, float]] = []
        for i, v in enumerate(values):
            if v is None:
                if run:
                    runs.append(run)
                run = []
            else:
                run.append((canvas.x_of(i, len(x_labels)),
                            canvas.y_of(v, lo, hi, log_y)))
        if run:
            runs.append(run)
        for seg in runs:
            if len(seg) > 1:
                path = " ".join(f"{x:.2f},{y:.2f}" for x, y in seg)
                canvas.parts.append(
                    f'<polyline points="{path}" fill="none" '
                    f'stroke="{color}" stroke-width="2"/>'
                )
        for x, y in points:
            canvas.parts.append(
                f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" '
                f'fill="{color}"/>'
            )
    canvas.draw_legend(legend)
    return canvas.finish()


def render_bar_chart(title: str, x_label: str, y_label: str,
                     x_labels: list[str], series: list[Series],
                     log_y: bool = True) -> str:
    """Grouped bars per categorical X position.

    On a log axis bars rise from the axis floor (half the smallest positive
    datum), so sub-1.0 values render as short bars below the 1 gridline.
    """
    lo, hi, ticks = _axis_for(series, log_y)
    canvas = _Canvas(title, x_label, y_label)
    canvas.draw_y_grid(ticks, lo, hi, log_y)
    canvas.draw_axes()
    canvas.draw_x_labels(x_labels)
    if _no_data_note(canvas, series):
        return canvas.finish()

    drawn = [(i, name, values) for i, (name, values) in enumerate(series)
             if any(v is not None for v in values)]
    legend = []
    slot = canvas.plot_w / len(x_labels)
    group_w = slot * 0.72
    bar_w = group_w / max(len(drawn), 1)
    for pos, (s_idx, name, values) in enumerate(drawn):
        color = PALETTE[s_idx % len(PALETTE)]
        legend.append((name, color))
        for i, v in enumerate(values):
            if v is None:
                continue
            x_center = canvas.x_of(i, len(x_labels))
            x = x_center - group_w / 2 + pos * bar_w
            y = canvas.y_of(v, lo, hi, log_y)
            height = canvas.plot_bottom - y
            canvas.parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{height:.2f}" fill="{color}"/>'
            )
    canvas.draw_legend(legend)
    return canvas.finish()
