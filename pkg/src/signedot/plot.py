"""Minimal self-contained SVG output for heatmaps and log-log sweeps."""

from __future__ import annotations

import math

import numpy as np

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _color(t: float) -> str:
    # blue -> white -> red
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        u = t * 2
        r, g, b = int(255 * u), int(255 * u), 255
    else:
        u = (t - 0.5) * 2
        r, g, b = 255, int(255 * (1 - u)), int(255 * (1 - u))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(matrix: np.ndarray, path, cell: int = 12, title: str = "") -> None:
    m = np.asarray(matrix, dtype=np.float64)
    lo, hi = float(m.min()), float(m.max())
    span = hi - lo if hi > lo else 1.0
    h, w = m.shape
    top = 20 if title else 0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" height="{h * cell + top}">'
    ]
    if title:
        parts.append(f'<text x="2" y="14" font-size="12">{title}</text>')
    for i in range(h):
        for j in range(w):
            parts.append(
                f'<rect x="{j * cell}" y="{i * cell + top}" width="{cell}" height="{cell}" '
                f'fill="{_color((m[i, j] - lo) / span)}"/>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def loglog_svg(series: dict, path, width: int = 480, height: int = 320, title: str = "") -> None:
    """``series`` maps a label to ``(xs, ys)``; non-positive points are skipped."""
    pts = {
        k: [(math.log10(x), math.log10(y)) for x, y in zip(*v) if x > 0 and y > 0]
        for k, v in series.items()
    }
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx) if max(allx) > min(allx) else min(allx) + 1
    y0, y1 = min(ally), max(ally) if max(ally) > min(ally) else min(ally) + 1
    pad = 40

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    parts.append(
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#888"/>'
    )
    if title:
        parts.append(f'<text x="{pad}" y="20" font-size="12">{title}</text>')
    for k, (label, v) in enumerate(pts.items()):
        col = _PALETTE[k % len(_PALETTE)]
        d = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in v)
        parts.append(f'<polyline points="{d}" fill="none" stroke="{col}"/>')
        parts.append(
            f'<text x="{width - pad + 2}" y="{pad + 14 * k + 10}" font-size="10" fill="{col}">{label}</text>'
        )
    parts.append(f'<text x="{pad}" y="{height - 8}" font-size="10">log10 sigma [{x0:.2f}, {x1:.2f}]</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
