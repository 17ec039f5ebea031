"""Static SVG figures: filled regions, polylines and segments in the w-plane."""

from __future__ import annotations

import numpy as np

PALETTE = {
    "region": "#cfe3f4",
    "region_edge": "#2b6a9e",
    "sym": "#f4dccf",
    "sym_edge": "#9e4a2b",
    "segment": "#c0392b",
    "path": "#1e8449",
    "axis": "#999999",
}


def _fmt(x):
    return f"{x:.6g}"


class Figure:
    """Accumulates shapes in world coordinates and writes them with v pointing up."""

    def __init__(self, width=640):
        self.width = width
        self.items = []
        self.lo = np.array([np.inf, np.inf])
        self.hi = -self.lo

    def _grow(self, xy):
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(xy):
            self.lo = np.minimum(self.lo, xy.min(axis=0))
            self.hi = np.maximum(self.hi, xy.max(axis=0))

    def region(self, R, fill="region", edge="region_edge", opacity=0.8):
        rings = list(R.shells) + list(R.holes)
        for r in rings:
            self._grow(r)
        self.items.append(("path", rings, PALETTE[fill], PALETTE[edge], opacity))

    def polyline(self, pts, color="path", closed=False, width=2.0):
        pts = np.asarray(pts)
        xy = np.column_stack([pts.real, pts.imag]) if np.iscomplexobj(pts) else pts
        self._grow(xy)
        self.items.append(("line", xy, PALETTE.get(color, color), closed, width))

    def segment(self, a, b, color="segment", width=3.0):
        self.polyline(np.array([a, b], dtype=complex), color, width=width)

    def render(self):
        lo, hi = self.lo, self.hi
        if not np.all(np.isfinite(lo)):
            lo, hi = np.zeros(2), np.ones(2)
        span = np.maximum(hi - lo, 1e-12)
        pad = 0.05 * span.max()
        lo, span = lo - pad, span + 2 * pad
        scale = self.width / span[0]
        height = max(1, int(round(span[1] * scale)))

        def tx(xy):
            x = (xy[:, 0] - lo[0]) * scale
            y = (lo[1] + span[1] - xy[:, 1]) * scale
            return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{height}" '
               f'viewBox="0 0 {self.width} {height}">',
               f'<rect width="100%" height="100%" fill="white"/>']
        if lo[1] < 0 < lo[1] + span[1]:
            y0 = _fmt((lo[1] + span[1]) * scale)
            out.append(f'<line x1="0" y1="{y0}" x2="{self.width}" y2="{y0}" '
                       f'stroke="{PALETTE["axis"]}" stroke-width="0.5"/>')
        for item in self.items:
            if item[0] == "path":
                _, rings, fill, edge, op = item
                d = " ".join("M " + tx(np.asarray(r)) + " Z" for r in rings)
                out.append(f'<path d="{d}" fill="{fill}" fill-opacity="{op}" fill-rule="evenodd" '
                           f'stroke="{edge}" stroke-width="1"/>')
            else:
                _, xy, color, closed, w = item
                tag = "polygon" if closed else "polyline"
                out.append(f'<{tag} points="{tx(xy)}" fill="none" stroke="{color}" '
                           f'stroke-width="{_fmt(w)}"/>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
