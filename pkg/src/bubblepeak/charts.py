"""Static SVG line charts, written by hand so output is byte-stable."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555")
DASH = "6 4"


@dataclass(frozen=True)
class Line:
    label: str
    times: Sequence[float]
    values: Sequence[float]
    dashed: bool = False
    axis: str = "left"
    color: Optional[str] = None


@dataclass(frozen=True)
class ChartSpec:
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    y2_label: str = ""
    width: int = 720
    height: int = 420
    margin: tuple = field(default=(48, 72, 56, 72))  # top, right, bottom, left


@dataclass(frozen=True)
class AxisMap:
    """Affine map from data range [lo, hi] onto pixel range [px_lo, px_hi]."""

    lo: float
    hi: float
    px_lo: float
    px_hi: float

    def __call__(self, x: float) -> float:
        return self.px_lo + (x - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round-number ticks covering [lo, hi]; the first and last bracket the data."""
    if hi <= lo:
        raise ValueError("empty range")
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step + 1e-9) * step
    stop = math.ceil(hi / step - 1e-9) * step
    n = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(n + 1)]


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        return lo, hi
    pad = abs(lo) * 0.1 or 1.0
    return lo - pad, hi + pad


def chart_axes(spec: ChartSpec, lines: Sequence[Line]) -> dict[str, AxisMap]:
    """The axis maps :func:`render_chart` uses: keys ``x``, ``left`` and, if used, ``right``."""
    if not lines or not any(len(ln.times) for ln in lines):
        raise ValueError("nothing to plot")
    for ln in lines:
        if len(ln.times) != len(ln.values):
            raise ValueError(f"line {ln.label!r}: times and values differ in length")
        if not all(math.isfinite(v) for v in (*ln.times, *ln.values)):
            raise ValueError(f"line {ln.label!r} has non-finite data")
        if ln.axis not in ("left", "right"):
            raise ValueError(f"axis must be 'left' or 'right', got {ln.axis!r}")
    top, right, bottom, left = spec.margin
    xs = [t for ln in lines for t in ln.times]
    xlo, xhi = _padded(min(xs), max(xs))
    axes = {"x": AxisMap(xlo, xhi, left, spec.width - right)}
    for side in ("left", "right"):
        vals = [v for ln in lines if ln.axis == side for v in ln.values]
        if not vals:
            continue
        ticks = nice_ticks(*_padded(min(vals), max(vals)))
        axes[side] = AxisMap(ticks[0], ticks[-1], spec.height - bottom, top)
    if "left" not in axes:
        raise ValueError("at least one line must use the left axis")
    return axes


def _num(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _tick_label(x: float) -> str:
    return f"{x:.10g}"


def render_chart(spec: ChartSpec, lines: Sequence[Line]) -> str:
    """An SVG 1.1 document with axes, ticks, a legend and one path per line.

    Dashed lines (projections) get a ``stroke-dasharray``; right-axis lines
    are scaled against a secondary axis drawn on the right edge.
    """
    axes = chart_axes(spec, lines)
    top, right, bottom, left = spec.margin
    w, h = spec.width, spec.height
    x_map = axes["x"]
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    if spec.title:
        out.append(f'<text x="{_num(w / 2)}" y="{_num(top / 2)}" text-anchor="middle" '
                   f'font-size="14">{escape(spec.title)}</text>')

    out.append('<g class="axes" stroke="#000000" stroke-width="1">')
    out.append(f'<line x1="{left}" y1="{h - bottom}" x2="{w - right}" y2="{h - bottom}"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{h - bottom}"/>')
    if "right" in axes:
        out.append(f'<line x1="{w - right}" y1="{top}" x2="{w - right}" y2="{h - bottom}"/>')
    out.append("</g>")

    out.append('<g class="ticks" fill="#000000">')
    for t in nice_ticks(x_map.lo, x_map.hi, target=8):
        if x_map.lo - 1e-9 <= t <= x_map.hi + 1e-9:
            px = _num(x_map(t))
            out.append(f'<line x1="{px}" y1="{h - bottom}" x2="{px}" y2="{h - bottom + 4}" stroke="#000000"/>')
            out.append(f'<text x="{px}" y="{h - bottom + 16}" text-anchor="middle">{_tick_label(t)}</text>')
    for side, x0, dx, anchor in (("left", left, -4, "end"), ("right", w - right, 4, "start")):
        if side not in axes:
            continue
        m = axes[side]
        for t in nice_ticks(m.lo, m.hi):
            py = _num(m(t))
            out.append(f'<line x1="{x0}" y1="{py}" x2="{x0 + dx}" y2="{py}" stroke="#000000"/>')
            out.append(f'<text x="{x0 + 2 * dx}" y="{py}" dy="4" text-anchor="{anchor}">{_tick_label(t)}</text>')
    out.append("</g>")

    if spec.x_label:
        out.append(f'<text x="{_num((left + w - right) / 2)}" y="{h - 12}" '
                   f'text-anchor="middle">{escape(spec.x_label)}</text>')
    if spec.y_label:
        cy = _num((top + h - bottom) / 2)
        out.append(f'<text x="16" y="{cy}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {cy})">{escape(spec.y_label)}</text>')
    if spec.y2_label and "right" in axes:
        cy = _num((top + h - bottom) / 2)
        out.append(f'<text x="{w - 14}" y="{cy}" text-anchor="middle" '
                   f'transform="rotate(90 {w - 14} {cy})">{escape(spec.y2_label)}</text>')

    for i, ln in enumerate(lines):
        color = ln.color or PALETTE[i % len(PALETTE)]
        y_map = axes[ln.axis]
        pts = " ".join(f"{_num(x_map(t))},{_num(y_map(v))}" for t, v in zip(ln.times, ln.values))
        dash = f' stroke-dasharray="{DASH}"' if ln.dashed else ""
        out.append(f'<polyline class="series" data-label="{escape(ln.label, {chr(34): "&quot;"})}" '
                   f'fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>')

    out.append('<g class="legend">')
    for i, ln in enumerate(lines):
        color = ln.color or PALETTE[i % len(PALETTE)]
        y = top + 12 + 16 * i
        dash = f' stroke-dasharray="{DASH}"' if ln.dashed else ""
        suffix = " (right axis)" if ln.axis == "right" else ""
        out.append(f'<line x1="{left + 10}" y1="{y}" x2="{left + 34}" y2="{y}" stroke="{color}" '
                   f'stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{left + 40}" y="{y}" dy="4">{escape(ln.label + suffix)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
