"""Minimal deterministic SVG charts (bars and lines).

Plain string assembly with fixed canvas geometry and no timestamps or
generated ids, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

from typing import Sequence

__all__ = ["bar_chart", "line_chart"]

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60, 20, 40, 50


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str, comment: str) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
    ]
    if comment:
        parts.append("<!-- " + comment.replace("--", "- -") + " -->")
    parts.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    parts.append(
        f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>'
    )
    return parts


def _axes(x_label: str, y_label: str, y_max: float) -> list[str]:
    x0, y0 = _ML, _H - _MB
    x1, y1 = _W - _MR, _MT
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.0f}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">{y_label}</text>',
        f'<text x="{x0 - 6}" y="{y1 + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{_fmt(y_max)}</text>',
        f'<text x="{x0 - 6}" y="{y0 + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">0</text>',
    ]


def bar_chart(
    counts: Sequence[float],
    bin_width: float,
    title: str,
    x_label: str = "lifetime",
    y_label: str = "count",
    comment: str = "",
) -> str:
    """Histogram-style bar chart; bar k covers [k*bin_width, (k+1)*bin_width)."""
    n = len(counts)
    y_max = max(max(counts, default=0.0), 1.0)
    parts = _header(title, comment) + _axes(x_label, y_label, y_max)
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    if n:
        bw = plot_w / n
        for k, c in enumerate(counts):
            h = plot_h * (c / y_max)
            x = _ML + k * bw
            y = _H - _MB - h
            parts.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bw * 0.9)}" '
                f'height="{_fmt(h)}" fill="steelblue"/>'
            )
        for k in range(0, n + 1, max(1, n // 8)):
            x = _ML + k * bw
            parts.append(
                f'<text x="{_fmt(x)}" y="{_H - _MB + 16}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{_fmt(k * bin_width)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_chart(
    xs: Sequence[float],
    ys: Sequence[float],
    title: str,
    x_label: str = "step",
    y_label: str = "value",
    comment: str = "",
) -> str:
    """Single polyline chart of ys against xs."""
    y_max = max(max(ys, default=0.0), 1e-12)
    x_max = max(max(xs, default=0.0), 1e-12)
    parts = _header(title, comment) + _axes(x_label, y_label, y_max)
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    if xs:
        pts = []
        for x, y in zip(xs, ys):
            px = _ML + plot_w * (x / x_max)
            py = _H - _MB - plot_h * (y / y_max)
            pts.append(f"{_fmt(px)},{_fmt(py)}")
        parts.append(
            '<polyline fill="none" stroke="firebrick" stroke-width="1.5" '
            f'points="{" ".join(pts)}"/>'
        )
        parts.append(
            f'<text x="{_W - _MR}" y="{_H - _MB + 16}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(x_max)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
