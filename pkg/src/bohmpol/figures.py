"""Self-contained SVG figures.

Renders a density map as a coarse grayscale rectangle raster with
trajectories drawn on top as polylines and equilibria as markers.  Pure
string assembly; no plotting dependency.  Figures are a convenience for
eyeballing runs; the CSV and JSON outputs are the data of record.
"""

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["render_figure"]

_MARGIN = 46.0
_PALETTE = ("#b13a2f", "#2d6a8e", "#3f8f4f", "#8a5fae", "#c07f2a", "#566066")
_MAX_RASTER = 96          # raster cells per axis; keeps files desk-sized
_MAX_POLYLINE = 2000      # vertices per trajectory before striding


def _shade(fraction: float) -> str:
    # sqrt stretch lifts the faint tails into visibility
    level = 255 - int(round(215.0 * math.sqrt(min(max(fraction, 0.0), 1.0))))
    return f"#{level:02x}{level:02x}{level:02x}"


def _downsample(density: np.ndarray, limit: int) -> np.ndarray:
    s1 = max(1, -(-density.shape[0] // limit))
    s2 = max(1, -(-density.shape[1] // limit))
    if s1 == 1 and s2 == 1:
        return density
    n1 = (density.shape[0] // s1) * s1
    n2 = (density.shape[1] // s2) * s2
    block = density[:n1, :n2].reshape(n1 // s1, s1, n2 // s2, s2)
    return block.mean(axis=(1, 3))


def render_figure(density_map, trajectories=(), equilibria=(),
                  title: str | None = None, size: int = 640) -> str:
    """Compose an SVG string for one density map plus overlays.

    density_map needs .region and .density (a grid field or an averaged
    density).  Trajectories contribute their .points polylines,
    equilibria their .position and .kind (nodes colored by charge sign,
    saddles drawn as crosses).
    """
    region = density_map.region
    rho = np.asarray(density_map.density, dtype=float)
    span1 = region.x1_max - region.x1_min
    span2 = region.x2_max - region.x2_min
    inner = size - 2.0 * _MARGIN

    def to_px(x1, x2):
        px = _MARGIN + (x1 - region.x1_min) / span1 * inner
        py = _MARGIN + (region.x2_max - x2) / span2 * inner
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="#ffffff"/>',
    ]

    raster = _downsample(rho, _MAX_RASTER)
    peak = raster.max()
    if peak > 0.0:
        n1, n2 = raster.shape
        w = inner / n1
        h = inner / n2
        for i in range(n1):
            for j in range(n2):
                frac = raster[i, j] / peak
                if frac < 1e-3:
                    continue
                px = _MARGIN + i * w
                py = _MARGIN + (n2 - 1 - j) * h
                parts.append(
                    f'<rect x="{px:.2f}" y="{py:.2f}" width="{w + 0.5:.2f}" '
                    f'height="{h + 0.5:.2f}" fill="{_shade(frac)}"/>'
                )

    for k, traj in enumerate(trajectories):
        pts = np.asarray(traj.points, dtype=float)
        stride = max(1, pts.shape[0] // _MAX_POLYLINE)
        pts = pts[::stride]
        coords = " ".join(
            "{:.2f},{:.2f}".format(*to_px(p[0], p[1])) for p in pts
        )
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5" stroke-opacity="0.9"/>'
        )

    for eq in equilibria:
        px, py = to_px(eq.position[0], eq.position[1])
        if eq.kind == "node":
            charge = eq.charge or 0
            fill = "#c03030" if charge > 0 else "#3056c0" if charge < 0 else "#777777"
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="5" fill="{fill}" '
                f'stroke="#000000" stroke-width="1">'
                f'<title>node, charge {charge:+d}</title></circle>'
            )
        else:
            arm = 6.0
            stroke = "#111111" if eq.kind == "saddle" else "#b8860b"
            parts.append(
                f'<g stroke="{stroke}" stroke-width="2">'
                f'<line x1="{px - arm:.2f}" y1="{py - arm:.2f}" '
                f'x2="{px + arm:.2f}" y2="{py + arm:.2f}"/>'
                f'<line x1="{px - arm:.2f}" y1="{py + arm:.2f}" '
                f'x2="{px + arm:.2f}" y2="{py - arm:.2f}"/>'
                f'<title>{escape(eq.kind)}</title></g>'
            )

    frame = (
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{inner:.2f}" '
        f'height="{inner:.2f}" fill="none" stroke="#333333"/>'
    )
    parts.append(frame)
    label = 'font-family="monospace" font-size="12" fill="#333333"'
    parts.append(
        f'<text x="{_MARGIN:.0f}" y="{size - _MARGIN + 16:.0f}" {label}>'
        f'{region.x1_min:g}</text>'
    )
    parts.append(
        f'<text x="{size - _MARGIN:.0f}" y="{size - _MARGIN + 16:.0f}" {label} '
        f'text-anchor="end">{region.x1_max:g}</text>'
    )
    parts.append(
        f'<text x="{_MARGIN - 6:.0f}" y="{size - _MARGIN:.0f}" {label} '
        f'text-anchor="end">{region.x2_min:g}</text>'
    )
    parts.append(
        f'<text x="{_MARGIN - 6:.0f}" y="{_MARGIN + 10:.0f}" {label} '
        f'text-anchor="end">{region.x2_max:g}</text>'
    )
    parts.append(
        f'<text x="{size / 2:.0f}" y="{size - _MARGIN + 32:.0f}" {label} '
        f'text-anchor="middle">x1</text>'
    )
    parts.append(
        f'<text x="{_MARGIN - 24:.0f}" y="{size / 2:.0f}" {label} '
        f'text-anchor="middle" transform="rotate(-90 {_MARGIN - 24:.0f} '
        f'{size / 2:.0f})">x2</text>'
    )
    if title:
        parts.append(
            f'<text x="{size / 2:.0f}" y="{_MARGIN - 14:.0f}" {label} '
            f'text-anchor="middle">{escape(title)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
