"""Self-contained SVG 1.1 line and scatter charts.

No rendering dependencies: charts are assembled as strings with fixed
two-decimal coordinates, so identical inputs produce byte-identical files.
Handles linear and log10 vertical axes, optional shaded bands (used for the
95% norm intervals), and point clouds for the error-vs-norm scatters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["ChartError", "Series", "render_chart"]

_PALETTE = ("#1f6fb4", "#d95f02", "#2a9d3a", "#7b4ea3")


class ChartError(ValueError):
    """The data cannot be drawn as requested (e.g. log axis on zeros)."""


@dataclass(frozen=True)
class Series:
    xs: Sequence[float]
    ys: Sequence[float]
    label: str = ""
    band: tuple[Sequence[float], Sequence[float]] | None = None
    points: bool = False


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _fmt(v: float) -> str:
    out = f"{v:.2f}"
    return "0.00" if out == "-0.00" else out


def _nice_ticks(lo: float, hi: float, want: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(want - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1.0, 2.0, 2.5, 5.0, 10.0) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    ticks = [10.0**e for e in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]
    return [t for t in ticks if lo / 1.0001 <= t <= hi * 1.0001] or [lo, hi]


def _tick_label(v: float) -> str:
    if v != 0 and (abs(v) >= 1e5 or abs(v) < 1e-4):
        return f"{v:.0e}"
    return f"{v:g}"


def render_chart(
    series: Sequence[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logy: bool = False,
    width: int = 720,
    height: int = 480,
) -> str:
    """Render one chart; vertical data must be positive when ``logy`` is set."""
    if not series or any(len(s.xs) == 0 for s in series):
        raise ChartError("nothing to draw")
    xs_all = np.concatenate([np.asarray(s.xs, dtype=np.float64) for s in series])
    ys_parts = []
    for s in series:
        ys_parts.append(np.asarray(s.ys, dtype=np.float64))
        if s.band is not None:
            ys_parts.extend(np.asarray(part, dtype=np.float64) for part in s.band)
    ys_all = np.concatenate(ys_parts)
    if not (np.isfinite(xs_all).all() and np.isfinite(ys_all).all()):
        raise ChartError("chart data contains non-finite values")
    if logy:
        if (ys_all <= 0).any():
            raise ChartError("log scale needs strictly positive values")
        ylo_d, yhi_d = float(ys_all.min()), float(ys_all.max())
        yticks = _log_ticks(ylo_d, yhi_d)
        ylo = math.log10(min(ylo_d, yticks[0]))
        yhi = math.log10(max(yhi_d, yticks[-1]))
        ymap_in = math.log10
    else:
        ylo_d, yhi_d = float(ys_all.min()), float(ys_all.max())
        pad = 0.05 * (yhi_d - ylo_d or 1.0)
        ylo, yhi = ylo_d - pad, yhi_d + pad
        yticks = [t for t in _nice_ticks(ylo, yhi) if ylo <= t <= yhi]
        ymap_in = float
    xlo, xhi = float(xs_all.min()), float(xs_all.max())
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    xticks = [t for t in _nice_ticks(xlo, xhi) if xlo - 1e-12 <= t <= xhi + 1e-12]
    if yhi == ylo:
        yhi = ylo + 1.0

    left, right, top, bottom = 72, 18, 42, 52
    pw, ph = width - left - right, height - top - bottom

    def px(x: float) -> float:
        return left + (x - xlo) / (xhi - xlo) * pw

    def py(y: float) -> float:
        return top + ph - (ymap_in(y) - ylo) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<g font-family="sans-serif" font-size="12" fill="#222222">',
    ]
    if title:
        out.append(f'<text x="{left}" y="24" font-size="14">{_esc(title)}</text>')
    for t in xticks:
        x = _fmt(px(t))
        out.append(f'<line x1="{x}" y1="{top}" x2="{x}" y2="{top + ph}" stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{x}" y="{top + ph + 18}" text-anchor="middle">{_esc(_tick_label(t))}</text>')
    for t in yticks:
        y = _fmt(py(t))
        out.append(f'<line x1="{left}" y1="{y}" x2="{left + pw}" y2="{y}" stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">{_esc(_tick_label(t))}</text>')
    out.append(
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444444" stroke-width="1"/>'
    )
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {top + ph / 2:.2f})">{_esc(ylabel)}</text>'
        )
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        xs = np.asarray(s.xs, dtype=np.float64)
        ys = np.asarray(s.ys, dtype=np.float64)
        if s.band is not None:
            lo_b, hi_b = (np.asarray(part, dtype=np.float64) for part in s.band)
            ring = [f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, hi_b)]
            ring += [f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs[::-1], lo_b[::-1])]
            out.append(f'<polygon points="{" ".join(ring)}" fill="{color}" fill-opacity="0.18" stroke="none"/>')
        if s.points:
            for x, y in zip(xs, ys):
                out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.5" fill="{color}" fill-opacity="0.7"/>')
        else:
            pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if s.label:
            ly = top + 16 + 16 * i
            out.append(f'<line x1="{left + pw - 150}" y1="{ly - 4}" x2="{left + pw - 126}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + pw - 120}" y="{ly}">{_esc(s.label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
