"""Minimal SVG emitters for recall curves and the P_FR histogram."""
from __future__ import annotations

import math
from typing import Sequence

W, H = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 40, 50
COLORS = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _x(d: float) -> float:
    return LEFT + d * (W - LEFT - RIGHT)


def _y(p: float) -> float:
    return H - BOTTOM - p * (H - TOP - BOTTOM)


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<title>{title}</title>',
        f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" '
        'fill="none" stroke="black" class="frame"/>',
    ]


def _p_axis(out: list[str]) -> None:
    for k in range(6):
        p = k / 5
        out.append(f'<text x="{LEFT - 8}" y="{_y(p) + 4:.2f}" text-anchor="end" font-size="11">{p:.1f}</text>')
    out.append(f'<text x="15" y="{(H - BOTTOM + TOP) / 2:.1f}" font-size="12" '
               f'transform="rotate(-90 15 {(H - BOTTOM + TOP) / 2:.1f})">P</text>')


def recall_curves_svg(curves: Sequence[Sequence[float]], labels: Sequence[str] | None = None) -> str:
    """Overlay of recall curves; ``curves[k][m]`` is P at cue size m.

    Distortion d runs along the bottom axis, cue intensity q = 1 - d on top.
    """
    out = _header("Recall probability P(d)")
    for k in range(6):
        v = k / 5
        out.append(f'<text x="{_x(v):.2f}" y="{H - BOTTOM + 16}" text-anchor="middle" font-size="11">{v:.1f}</text>')
        out.append(f'<text x="{_x(v):.2f}" y="{TOP - 6}" text-anchor="middle" font-size="11">{1 - v:.1f}</text>')
    out.append(f'<text x="{(W + LEFT) / 2:.1f}" y="{H - 10}" text-anchor="middle" font-size="12">d</text>')
    out.append(f'<text x="{(W + LEFT) / 2:.1f}" y="{TOP - 22}" text-anchor="middle" font-size="12">q</text>')
    _p_axis(out)
    for idx, pts in enumerate(curves):
        n = len(pts) - 1
        color = COLORS[idx % len(COLORS)]
        label = labels[idx] if labels and idx < len(labels) else f"curve {idx + 1}"
        coords = [(_x(1 - m / n), _y(float(p))) for m, p in enumerate(pts)]
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
        out.append(f'<polyline class="curve" fill="none" stroke="{color}" points="{path}"><title>{label}</title></polyline>')
        for x, y in coords:
            out.append(f'<circle class="marker" cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def histogram_svg(rows: Sequence[tuple[float, float]], floor_pct: float = 1e-3) -> str:
    """Horizontal bars: y = P_FR, length = frequency in percent (log scale)."""
    out = _header("Distribution of free-recall probability")
    lo, hi = math.log10(floor_pct), 2.0

    def bx(pct: float) -> float:
        v = (math.log10(max(pct, floor_pct)) - lo) / (hi - lo)
        return LEFT + v * (W - LEFT - RIGHT)

    for e in range(int(lo), int(hi) + 1):
        out.append(f'<text x="{bx(10.0 ** e):.2f}" y="{H - BOTTOM + 16}" text-anchor="middle" font-size="11">1e{e}</text>')
    for ref in (0.1, 1.0, 10.0):
        out.append(f'<line x1="{bx(ref):.2f}" y1="{TOP}" x2="{bx(ref):.2f}" y2="{H - BOTTOM}" '
                   'stroke="gray" stroke-dasharray="2,3"/>')
    out.append(f'<text x="{(W + LEFT) / 2:.1f}" y="{H - 10}" text-anchor="middle" font-size="12">D(P_FR), %</text>')
    _p_axis(out)
    for p, pct in rows:
        if pct <= 0:
            continue
        y = _y(p)
        out.append(f'<rect class="bar" x="{LEFT}" y="{y - 1:.2f}" width="{bx(pct) - LEFT:.2f}" height="2" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
