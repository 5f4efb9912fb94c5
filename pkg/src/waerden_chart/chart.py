"""Adjusted p-value decision charts as standalone SVG plus a terminal rendering.

Each adjustment method gets its own panel: group index on the x axis (input
order), adjusted p-value on the y axis, and a dashed reference line at the
nominal alpha. Points strictly below alpha are drawn as flagged markers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .report import DISPLAY_FLOOR, AnalysisReport, format_p

METHOD_TITLES = {
    "bh": "Benjamini-Hochberg",
    "bonferroni": "Bonferroni",
    "holm": "Holm",
    "hochberg": "Hochberg",
    "hommel": "Hommel",
}


@dataclass(frozen=True)
class ChartSpec:
    labels: tuple[str, ...]
    series: tuple[tuple[str, tuple[float, ...]], ...]
    alpha: float
    log_scale: bool = False

    def __post_init__(self):
        if not self.series:
            raise DomainError("chart needs at least one series")
        g = len(self.labels)
        for method, values in self.series:
            if len(values) != g:
                raise DomainError(f"series {method!r} has {len(values)} points for {g} groups")
            if any(not 0.0 <= v <= 1.0 for v in values):
                raise DomainError(f"series {method!r} has values outside [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    def flagged(self, method: str) -> list[bool]:
        values = dict(self.series)[method]
        return [v < self.alpha for v in values]


@dataclass(frozen=True)
class RenderedChart:
    svg: str
    text: str


def chart_spec_from_report(report: AnalysisReport, log_scale: bool = False) -> ChartSpec:
    series = tuple((a.method, tuple(a.adjusted)) for a in report.adjustments)
    return ChartSpec(report.sample.labels, series, report.provenance.alpha, log_scale)


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _log_floor(spec: ChartSpec) -> float:
    smallest = min([v for _, vals in spec.series for v in vals if v > 0] + [spec.alpha])
    exponent = math.floor(math.log10(max(smallest, DISPLAY_FLOOR)))
    return 10.0 ** min(exponent, -1)


PANEL_W = 420
PANEL_H = 320
MARGIN = dict(left=64, right=24, top=48, bottom=56)


def _panel(spec: ChartSpec, method: str, values: Sequence[float], x0: float) -> list[str]:
    left = x0 + MARGIN["left"]
    right = x0 + PANEL_W - MARGIN["right"]
    top = MARGIN["top"]
    bottom = PANEL_H - MARGIN["bottom"]
    g = len(values)

    if spec.log_scale:
        floor = _log_floor(spec)
        lo, hi = math.log10(floor), 0.0

        def ypx(p: float) -> float:
            return bottom - (math.log10(max(p, floor)) - lo) / (hi - lo) * (bottom - top)

        ticks = [10.0 ** e for e in range(int(lo), 1)]
        tick_label = lambda t: f"1e{int(round(math.log10(t)))}" if t < 1 else "1"  # noqa: E731
    else:
        def ypx(p: float) -> float:
            return bottom - p * (bottom - top)

        ticks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        tick_label = lambda t: f"{t:.1f}"  # noqa: E731

    def xpx(k: int) -> float:
        return left + (k + 0.5) * (right - left) / g

    title = METHOD_TITLES.get(method, method)
    out = [f'<g class="panel" data-method="{_escape(method)}">',
           f'<text x="{(left + right) / 2:.1f}" y="{top - 20}" text-anchor="middle" '
           f'font-size="15" font-family="sans-serif">{_escape(title)}</text>',
           f'<rect x="{left:.1f}" y="{top}" width="{right - left:.1f}" height="{bottom - top}" '
           f'fill="none" stroke="#444" stroke-width="1"/>']
    for t in ticks:
        y = ypx(t)
        out.append(f'<line x1="{left - 4:.1f}" y1="{y:.1f}" x2="{left:.1f}" y2="{y:.1f}" stroke="#444"/>')
        out.append(f'<text x="{left - 7:.1f}" y="{y + 4:.1f}" text-anchor="end" font-size="11" '
                   f'font-family="sans-serif">{tick_label(t)}</text>')
    for k, label in enumerate(spec.labels):
        x = xpx(k)
        out.append(f'<text x="{x:.1f}" y="{bottom + 16}" text-anchor="middle" font-size="11" '
                   f'font-family="sans-serif">{_escape(label)}</text>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{bottom + 38}" text-anchor="middle" '
               f'font-size="12" font-family="sans-serif">group</text>')
    out.append(f'<text x="{x0 + 16:.1f}" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
               f'font-size="12" font-family="sans-serif" '
               f'transform="rotate(-90 {x0 + 16:.1f} {(top + bottom) / 2:.1f})">adjusted p-value</text>')
    ya = ypx(spec.alpha)
    out.append(f'<line class="alpha-line" x1="{left:.1f}" y1="{ya:.1f}" x2="{right:.1f}" y2="{ya:.1f}" '
               f'stroke="#d62728" stroke-width="1.2" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{right - 2:.1f}" y="{ya - 5:.1f}" text-anchor="end" font-size="11" '
               f'fill="#d62728" font-family="sans-serif">alpha = {spec.alpha:g}</text>')
    pts = " ".join(f"{xpx(k):.1f},{ypx(v):.1f}" for k, v in enumerate(values))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1"/>')
    for k, v in enumerate(values):
        x, y = xpx(k), ypx(v)
        tip = f"{spec.labels[k]}: {format_p(v)}"
        group = _escape(spec.labels[k])
        if v < spec.alpha:
            out.append(f'<circle class="point flagged" data-group="{group}" cx="{x:.1f}" cy="{y:.1f}" r="6" fill="#d62728" '
                       f'stroke="#000" stroke-width="1"><title>{_escape(tip)}</title></circle>')
        else:
            out.append(f'<circle class="point" data-group="{group}" cx="{x:.1f}" cy="{y:.1f}" r="4" fill="#1f77b4">'
                       f'<title>{_escape(tip)}</title></circle>')
    out.append("</g>")
    return out


def render_svg(spec: ChartSpec) -> str:
    width = PANEL_W * len(spec.series)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" '
             f'viewBox="0 0 {width} {PANEL_H}">',
             '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>']
    for idx, (method, values) in enumerate(spec.series):
        lines.extend(_panel(spec, method, values, idx * PANEL_W))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_text(spec: ChartSpec, width: int = 40) -> str:
    """Monospaced rendering: one bar per group, '|' marks alpha, '*' flags."""
    lines = []
    label_w = max(len(lab) for lab in spec.labels)
    col = max(0, min(width - 1, int(round(spec.alpha * width))))
    for method, values in spec.series:
        lines.append(f"{METHOD_TITLES.get(method, method)} adjusted p-values (alpha = {spec.alpha:g})")
        for label, v in zip(spec.labels, values):
            filled = int(round(v * width))
            bar = ["#" if i < filled else " " for i in range(width)]
            if bar[col] == " ":
                bar[col] = "|"
            mark = "*" if v < spec.alpha else " "
            lines.append(f"  {label:<{label_w}} [{''.join(bar)}] {format_p(v):>9} {mark}")
        lines.append("")
    return "\n".join(lines)


def render_chart(spec: ChartSpec) -> RenderedChart:
    return RenderedChart(render_svg(spec), render_text(spec))
