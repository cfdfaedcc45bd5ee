"""Minimal deterministic SVG charts (lines and bars), no dependencies.

Only what the CLI's `plot` command needs: scaled polylines with axes,
ticks on a 1-2-5 ladder, and labeled bars. Output is a plain SVG string
with fixed float formatting so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import InvalidInputError

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MARGIN_L = 64.0
_MARGIN_R = 16.0
_MARGIN_T = 40.0
_MARGIN_B = 48.0


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _tick_step(span: float) -> float:
    if span <= 0.0:
        return 1.0
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    unit = raw / mag
    if unit <= 1.0:
        return mag
    if unit <= 2.0:
        return 2.0 * mag
    if unit <= 5.0:
        return 5.0 * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _tick_step(hi - lo)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * max(1.0, abs(hi)):
        out.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return out


def _pad_range(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.1
        return lo - pad, lo + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def line_chart(
    series: Sequence[tuple[str, Sequence[tuple[float, float]]]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    width: float = 720.0,
    height: float = 440.0,
) -> str:
    """Multi-series line chart; series = [(label, [(x, y), ...]), ...]."""
    if not series or all(len(pts) == 0 for _, pts in series):
        raise InvalidInputError("nothing to plot")
    xs = [p[0] for _, pts in series for p in pts]
    ys = [p[1] for _, pts in series for p in pts]
    if any(not (math.isfinite(x) and math.isfinite(y)) for x, y in zip(xs, ys)):
        raise InvalidInputError("points must be finite")
    x_lo, x_hi = _pad_range(min(xs), max(xs))
    y_lo, y_hi = _pad_range(min(ys), max(ys))

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
        '<g font-family="sans-serif" font-size="12" fill="#222">',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(width / 2)}" y="20" text-anchor="middle" '
            f'font-size="15">{escape(title)}</text>'
        )

    # axes box and gridlines
    parts.append(
        f'<rect x="{_fmt(_MARGIN_L)}" y="{_fmt(_MARGIN_T)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#444"/>'
    )
    for t in _ticks(x_lo, x_hi):
        px = sx(t)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(_MARGIN_T)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(_MARGIN_T + plot_h)}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{_fmt(_MARGIN_T + plot_h + 16)}" '
            f'text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        py = sy(t)
        parts.append(
            f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(_MARGIN_L + plot_w)}" y2="{_fmt(py)}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN_L - 6)}" y="{_fmt(py + 4)}" '
            f'text-anchor="end">{_fmt(t)}</text>'
        )

    for i, (label, pts) in enumerate(series):
        if not pts:
            continue
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        if label:
            lx = _MARGIN_L + plot_w - 8
            ly = _MARGIN_T + 16 + 16 * i
            parts.append(
                f'<line x1="{_fmt(lx - 40)}" y1="{_fmt(ly - 4)}" x2="{_fmt(lx - 24)}" '
                f'y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{_fmt(lx - 20)}" y="{_fmt(ly)}" '
                f'text-anchor="start">{escape(label)}</text>'
            )

    if x_label:
        parts.append(
            f'<text x="{_fmt(_MARGIN_L + plot_w / 2)}" y="{_fmt(height - 10)}" '
            f'text-anchor="middle">{escape(x_label)}</text>'
        )
    if y_label:
        cx, cy = 16.0, _MARGIN_T + plot_h / 2
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" text-anchor="middle" '
            f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(y_label)}</text>'
        )
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"


def bar_chart(
    labels: Sequence[str],
    values: Sequence[float],
    title: str = "",
    y_label: str = "",
    width: float = 560.0,
    height: float = 400.0,
) -> str:
    if not labels or len(labels) != len(values):
        raise InvalidInputError("labels and values must be non-empty and aligned")
    if any(not math.isfinite(v) for v in values):
        raise InvalidInputError("values must be finite")
    y_lo = min(0.0, min(values))
    y_hi = max(0.0, max(values))
    y_lo, y_hi = _pad_range(y_lo, y_hi)

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    slot = plot_w / len(labels)
    bar_w = slot * 0.6

    def sy(y: float) -> float:
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
        '<g font-family="sans-serif" font-size="12" fill="#222">',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(width / 2)}" y="20" text-anchor="middle" '
            f'font-size="15">{escape(title)}</text>'
        )
    parts.append(
        f'<rect x="{_fmt(_MARGIN_L)}" y="{_fmt(_MARGIN_T)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#444"/>'
    )
    for t in _ticks(y_lo, y_hi):
        py = sy(t)
        parts.append(
            f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(_MARGIN_L + plot_w)}" y2="{_fmt(py)}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN_L - 6)}" y="{_fmt(py + 4)}" '
            f'text-anchor="end">{_fmt(t)}</text>'
        )
    zero = sy(max(0.0, y_lo))
    for i, (label, value) in enumerate(zip(labels, values)):
        color = PALETTE[i % len(PALETTE)]
        x = _MARGIN_L + slot * i + (slot - bar_w) / 2
        top = min(sy(value), zero)
        h = abs(sy(value) - zero)
        parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(top)}" width="{_fmt(bar_w)}" '
            f'height="{_fmt(h)}" fill="{color}" fill-opacity="0.85"/>'
        )
        parts.append(
            f'<text x="{_fmt(x + bar_w / 2)}" y="{_fmt(_MARGIN_T + plot_h + 16)}" '
            f'text-anchor="middle">{escape(label)}</text>'
        )
        parts.append(
            f'<text x="{_fmt(x + bar_w / 2)}" y="{_fmt(top - 4)}" '
            f'text-anchor="middle">{_fmt(value)}</text>'
        )
    if y_label:
        cx, cy = 16.0, _MARGIN_T + plot_h / 2
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" text-anchor="middle" '
            f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(y_label)}</text>'
        )
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"
