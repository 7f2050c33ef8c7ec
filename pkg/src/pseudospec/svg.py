"""Minimal self-contained SVG figures: scatter, polylines and axes.

Output is plain text with fixed number formatting, so identical inputs give
identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .serialization import to_jsonable

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")


def _f(v: float) -> str:
    return f"{v:.3f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


@dataclass
class Figure:
    """Axes with a data-to-pixel map; elements are appended in call order."""

    xlim: tuple[float, float]
    ylim: tuple[float, float]
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    width: int = 640
    height: int = 480
    margin: int = 60
    elements: list = field(default_factory=list)
    overlay: list = field(default_factory=list)

    def _px(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        w = self.width - 2 * self.margin
        h = self.height - 2 * self.margin
        return self.margin + (x - x0) / (x1 - x0) * w, self.height - self.margin - (y - y0) / (y1 - y0) * h

    def polyline(self, xs, ys, color="#000", width=1.0, dash: str | None = None, closed=False):
        pts = " ".join(f"{_f(px)},{_f(py)}" for px, py in (self._px(x, y) for x, y in zip(xs, ys)))
        tag = "polygon" if closed else "polyline"
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<{tag} points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'
        )

    def scatter(self, xs, ys, color="#000", r=2.5, marker="circle"):
        for x, y in zip(xs, ys):
            px, py = self._px(x, y)
            if marker == "cross":
                d = r
                self.elements.append(
                    f'<path d="M{_f(px - d)},{_f(py - d)}L{_f(px + d)},{_f(py + d)}'
                    f'M{_f(px - d)},{_f(py + d)}L{_f(px + d)},{_f(py - d)}" stroke="{color}" stroke-width="1"/>'
                )
            else:
                self.elements.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="{r}" fill="{color}"/>')

    def legend(self, entries):
        x = self.width - self.margin + 6
        for k, (label, color) in enumerate(entries):
            y = self.margin + 14 * k
            self.overlay.append(f'<rect x="{x}" y="{y - 8}" width="10" height="3" fill="{color}"/>')
            self.overlay.append(f'<text x="{x + 14}" y="{y}" font-size="10">{escape(label)}</text>')

    def render(self, metadata: dict | None = None) -> str:
        m, W, H = self.margin, self.width, self.height
        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W + 80}" height="{H}" '
            f'viewBox="0 0 {W + 80} {H}" font-family="sans-serif">',
        ]
        if metadata is not None:
            meta = json.dumps(to_jsonable(metadata), sort_keys=True, allow_nan=False)
            out.append(f"<metadata>{escape(meta)}</metadata>")
        out.append(f'<rect x="0" y="0" width="{W + 80}" height="{H}" fill="#fff"/>')
        out.append(f'<clipPath id="plot"><rect x="{m}" y="{m}" width="{W - 2 * m}" height="{H - 2 * m}"/></clipPath>')
        out.append(f'<rect x="{m}" y="{m}" width="{W - 2 * m}" height="{H - 2 * m}" fill="none" stroke="#000"/>')
        for t in _nice_ticks(*self.xlim):
            px, _ = self._px(t, self.ylim[0])
            out.append(f'<line x1="{_f(px)}" y1="{H - m}" x2="{_f(px)}" y2="{H - m + 5}" stroke="#000"/>')
            out.append(f'<text x="{_f(px)}" y="{H - m + 18}" font-size="10" text-anchor="middle">{_tick_label(t)}</text>')
        for t in _nice_ticks(*self.ylim):
            _, py = self._px(self.xlim[0], t)
            out.append(f'<line x1="{m - 5}" y1="{_f(py)}" x2="{m}" y2="{_f(py)}" stroke="#000"/>')
            out.append(f'<text x="{m - 8}" y="{_f(py + 3)}" font-size="10" text-anchor="end">{_tick_label(t)}</text>')
        out.append(f'<text x="{W / 2}" y="{m / 2}" font-size="13" text-anchor="middle">{escape(self.title)}</text>')
        out.append(f'<text x="{W / 2}" y="{H - 12}" font-size="11" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(
            f'<text x="14" y="{H / 2}" font-size="11" text-anchor="middle" '
            f'transform="rotate(-90 14 {H / 2})">{escape(self.ylabel)}</text>'
        )
        out.append('<g clip-path="url(#plot)">')
        out.extend(self.elements)
        out.append("</g>")
        out.extend(self.overlay)
        out.append("</svg>")
        return "\n".join(out) + "\n"


def padded_limits(values, pad: float = 0.05) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return (0.0, 1.0)
    lo, hi = min(finite), max(finite)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    d = (hi - lo) * pad
    return (lo - d, hi + d)
