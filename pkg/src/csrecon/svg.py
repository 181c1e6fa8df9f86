"""Minimal static SVG line charts (no plotting library needed)."""

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def write_lines(path, x, series, title="", width=800, height=300, pad=40):
    """Draw each ``series[name]`` against ``x`` as a polyline."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] or [np.zeros(1)])
    lo, hi = (finite.min(), finite.max()) if finite.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0
    x0, x1 = x.min(), x.max() if x.max() > x.min() else x.min() + 1.0

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="{pad / 2}" font-size="14">{escape(title)}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height - pad / 4}" font-size="10">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad / 4}" font-size="10" text-anchor="end">{x1:.4g}</text>',
        f'<text x="2" y="{height - pad}" font-size="10">{lo:.3g}</text>',
        f'<text x="2" y="{pad}" font-size="10">{hi:.3g}</text>',
    ]
    for i, (name, y) in enumerate(ys.items()):
        color = _COLORS[i % len(_COLORS)]
        ok = np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        parts.append(
            f'<text x="{width - pad}" y="{pad + 14 * (i + 1)}" font-size="11" '
            f'text-anchor="end" fill="{color}">{escape(str(name))}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
