"""
Native SVG rendering of tail curves.

Curves are drawn as y = log(-log phi) against V, where a double-exponential
law phi = exp(-C exp(cV)) becomes the straight line y = log C + cV.
"""
import math
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from pyfekete.spectrum import TailCurve
from pyfekete.theory import PredictionEnvelope

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _points(curve: TailCurve) -> Tuple[np.ndarray, np.ndarray]:
    mask = (curve.phi > 0) & (curve.phi < 1)
    return curve.V_grid[mask], np.log(-np.log(curve.phi[mask]))


def _ticks(lo: float, hi: float, count: int = 6) -> List[float]:
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render_tail_svg(curves: Sequence[TailCurve], envelopes: Sequence[PredictionEnvelope] = (),
                    width: int = 720, height: int = 480, title: str = "",
                    windows: Optional[Mapping[int, float]] = None) -> str:
    """`windows` maps an order d to the V where its uniform tail estimate stops."""
    margin = 60
    series = [(curve, *_points(curve)) for curve in curves]
    xs = np.concatenate([x for _, x, _ in series]) if series else np.array([0.0, 1.0])
    ys = np.concatenate([y for _, _, y in series]) if series else np.array([0.0, 1.0])
    if xs.size == 0:
        xs, ys = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(v: float) -> float:
        return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(v: float) -> float:
        return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        '<defs><clipPath id="plot-area">'
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}"/>'
        '</clipPath></defs>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
        'fill="none" stroke="#333"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="{margin / 2:.1f}" text-anchor="middle">{title}</text>')

    for v in _ticks(x_lo, x_hi):
        parts.append(f'<text x="{sx(v):.1f}" y="{height - margin + 18:.1f}" text-anchor="middle">{v:.2f}</text>')
    for v in _ticks(y_lo, y_hi):
        parts.append(f'<text x="{margin - 6:.1f}" y="{sy(v) + 4:.1f}" text-anchor="end">{v:.2f}</text>')
    parts.append(f'<text x="{width / 2:.1f}" y="{height - 15:.1f}" text-anchor="middle">V</text>')
    parts.append(f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 15 {height / 2:.1f})">log(-log Phi)</text>')

    legend_y = margin + 15
    for i, (curve, x, y) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        parts.append(f'<polyline clip-path="url(#plot-area)" fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{points}"/>')
        parts.append(f'<text x="{width - margin - 8:.1f}" y="{legend_y:.1f}" text-anchor="end" '
                     f'fill="{color}">order {curve.d} ({curve.kind})</text>')
        legend_y += 15

    # dotted verticals at the largest V the uniform tail estimate covers
    for d, v_max in sorted((windows or {}).items()):
        if not math.isfinite(v_max) or not x_lo <= v_max <= x_hi:
            continue
        color = PALETTE[(d - 2) % len(PALETTE)]
        parts.append(f'<line class="tail-window" x1="{sx(v_max):.2f}" y1="{margin}" x2="{sx(v_max):.2f}" '
                     f'y2="{height - margin}" stroke="{color}" stroke-dasharray="2 3"/>')
        parts.append(f'<text x="{sx(v_max) + 4:.1f}" y="{height - margin - 6:.1f}" fill="{color}">'
                     f'window d={d}</text>')

    for env in envelopes:
        color = PALETTE[(env.d - 2) % len(PALETTE)]
        if env.constant is None or env.constant <= 0:
            continue
        y0 = math.log(env.constant) + env.rate * x_lo
        y1 = math.log(env.constant) + env.rate * x_hi
        parts.append(f'<line clip-path="url(#plot-area)" x1="{sx(x_lo):.2f}" y1="{sy(y0):.2f}" '
                     f'x2="{sx(x_hi):.2f}" y2="{sy(y1):.2f}" stroke="{color}" stroke-dasharray="6 4"/>')
        parts.append(f'<text x="{width - margin - 8:.1f}" y="{legend_y:.1f}" text-anchor="end" '
                     f'fill="{color}">d={env.d} {env.kind} envelope</text>')
        legend_y += 15

    parts.append('</svg>')
    return "\n".join(parts) + "\n"
