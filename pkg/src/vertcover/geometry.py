"""
Planar regions bounded by polygons, and their vertical structure.

A :class:`Region` is a union of disjoint simple polygons ("shells") minus
polygonal holes.  Everything the proof needs from such a set is read off its
vertical cross-sections: the section at ``u`` is the union of the intervals
cut from the line ``Re w = u``.

Sections are evaluated with a half-open crossing rule.  With ``side="right"``
an edge spanning ``[x_min, x_max]`` is counted when ``x_min <= u < x_max``,
which returns the right-hand limit of the section; ``side="left"`` counts
``x_min < u <= x_max`` and returns the left-hand limit.  Both are exact at
vertex abscissas, so the parity pairing never sees a degenerate line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateLine, OriginOutside, SelfIntersection


def _ring(pts):
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = np.column_stack([a.real, a.imag]) if np.iscomplexobj(pts) else a.reshape(-1, 2)
    if len(a) > 1 and np.allclose(a[0], a[-1]):
        a = a[:-1]
    return a


def signed_area(ring):
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _dedupe(ring, tol):
    keep = np.ones(len(ring), dtype=bool)
    last = ring[0]
    for i in range(1, len(ring)):
        if np.hypot(*(ring[i] - last)) <= tol:
            keep[i] = False
        else:
            last = ring[i]
    ring = ring[keep]
    while len(ring) > 1 and np.hypot(*(ring[-1] - ring[0])) <= tol:
        ring = ring[:-1]
    return ring


class CrossSection(NamedTuple):
    u: float
    intervals: np.ndarray  # (k, 2), sorted, disjoint
    measure: float


class VerticalSegment(NamedTuple):
    length: float
    u0: float
    v_lo: float
    v_hi: float


@dataclass(frozen=True)
class SectionBatch:
    """Cross-sections of one region at many abscissas, stored CSR-style."""

    us: np.ndarray
    offsets: np.ndarray  # crossings of us[i] are v[offsets[i]:offsets[i+1]]
    v: np.ndarray

    def __len__(self):
        return len(self.us)

    def intervals(self, i):
        return self.v[self.offsets[i]:self.offsets[i + 1]].reshape(-1, 2)

    def counts(self):
        return np.diff(self.offsets) // 2

    def measures(self):
        lens = self.v[1::2] - self.v[0::2]
        csum = np.concatenate([[0.0], np.cumsum(lens)])
        return csum[self.offsets[1:] // 2] - csum[self.offsets[:-1] // 2]

    def longest(self):
        """Per abscissa: (length, v_lo, v_hi) of the longest interval; zeros if empty."""
        n = len(self.us)
        out = np.zeros((n, 3))
        lens = self.v[1::2] - self.v[0::2]
        owner = np.repeat(np.arange(n), self.counts())
        if len(lens):
            order = np.lexsort((-lens, owner))
            first = np.ones(len(order), dtype=bool)
            first[1:] = owner[order][1:] != owner[order][:-1]
            best = order[first]
            out[owner[best], 0] = lens[best]
            out[owner[best], 1] = self.v[0::2][best]
            out[owner[best], 2] = self.v[1::2][best]
        return out


class Region:
    """Disjoint simple polygons with holes.

    Parameters
    ----------
    shells, holes : sequence of (n, 2) arrays or complex vertex arrays
        Orientation is normalized: shells counterclockwise, holes clockwise.
    snap_tol : float, optional
        Geometric tolerance; defaults to 1e-9 times the diameter.
    """

    def __init__(self, shells, holes=(), snap_tol=None):
        shells = [_ring(s) for s in shells]
        holes = [_ring(h) for h in holes]
        allpts = np.vstack(shells + holes) if shells else np.zeros((0, 2))
        if not len(allpts) or not np.all(np.isfinite(allpts)):
            raise ValueError("region needs finite vertices")
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        self.diameter = float(np.hypot(*(hi - lo)))
        self.snap_tol = float(snap_tol) if snap_tol is not None else 1e-9 * self.diameter
        self.shells = tuple(self._orient(_dedupe(s, self.snap_tol), +1) for s in shells)
        self.holes = tuple(self._orient(_dedupe(h, self.snap_tol), -1) for h in holes)
        rings = self.shells + self.holes
        a = np.vstack(rings)
        b = np.vstack([np.roll(r, -1, axis=0) for r in rings])
        self._x1, self._y1, self._x2, self._y2 = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
        self.bounds = (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @staticmethod
    def _orient(ring, sign):
        if len(ring) < 3:
            raise ValueError("ring has fewer than three distinct vertices")
        return ring if signed_area(ring) * sign > 0 else ring[::-1].copy()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_polygon(cls, pts, snap_tol=None):
        return cls([pts], snap_tol=snap_tol)

    @classmethod
    def rectangle(cls, u0, u1, v0, v1):
        return cls([[(u0, v0), (u1, v0), (u1, v1), (u0, v1)]])

    def to_dict(self):
        return {
            "shells": [r.tolist() for r in self.shells],
            "holes": [r.tolist() for r in self.holes],
            "snap_tol": self.snap_tol,
        }

    @classmethod
    def from_dict(cls, d):
        if "shells" not in d:
            raise ValueError("region record lacks 'shells'")
        return cls(d["shells"], d.get("holes", ()), d.get("snap_tol"))

    def mirrored(self):
        """Reflection across the imaginary axis, u -> -u."""
        flip = np.array([-1.0, 1.0])
        return Region([s * flip for s in self.shells], [h * flip for h in self.holes],
                      self.snap_tol)

    # -- measures -----------------------------------------------------------

    def area(self):
        return sum(signed_area(s) for s in self.shells) + sum(signed_area(h) for h in self.holes)

    def vertex_us(self):
        return np.unique(self._x1)

    def contains(self, pts):
        """Even-odd point-in-region test (boundary points are unspecified)."""
        p = np.asarray(pts, dtype=complex).ravel()
        px, py = p.real[:, None], p.imag[:, None]
        x1, y1, x2, y2 = self._x1, self._y1, self._x2, self._y2
        cond = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        hits = cond & (px < xint)
        return (hits.sum(axis=1) % 2 == 1).reshape(np.shape(pts))

    # -- sections -------------------------------------------------------------

    def sections(self, us, side="right"):
        """Cross-sections at every abscissa in ``us`` (a :class:`SectionBatch`)."""
        us = np.atleast_1d(np.asarray(us, dtype=float))
        order = np.argsort(us, kind="stable")
        su = us[order]
        x1, y1, x2, y2 = self._x1, self._y1, self._x2, self._y2
        xmin, xmax = np.minimum(x1, x2), np.maximum(x1, x2)
        live = xmax > xmin
        xmin, xmax = xmin[live], xmax[live]
        ex1, ey1, ex2, ey2 = x1[live], y1[live], x2[live], y2[live]
        rule = "left" if side == "right" else "right"
        lo = np.searchsorted(su, xmin, rule)
        hi = np.searchsorted(su, xmax, rule)
        cnt = np.maximum(hi - lo, 0)
        total = int(cnt.sum())
        e = np.repeat(np.arange(len(cnt)), cnt)
        start = np.concatenate([[0], np.cumsum(cnt)[:-1]])
        k = lo[e] + (np.arange(total) - start[e])
        slope = (ey2[e] - ey1[e]) / (ex2[e] - ex1[e])
        v = ey1[e] + slope * (su[k] - ex1[e])
        # sorted position -> original position
        pos = order[k]
        tie = slope if side == "right" else -slope
        idx = np.lexsort((tie, v, pos))
        v, pos = v[idx], pos[idx]
        counts = np.bincount(pos, minlength=len(us))
        if np.any(counts % 2):
            raise DegenerateLine("odd crossing count; region rings are not closed")
        offsets = np.concatenate([[0], np.cumsum(counts)])
        return SectionBatch(us, offsets, v)

    def section(self, u, side="right"):
        b = self.sections([u], side)
        iv = b.intervals(0)
        return CrossSection(float(u), iv, float(np.sum(iv[:, 1] - iv[:, 0])))


def region_from_polyline(curve, check_simple=True):
    """Interior of a simple closed polyline as a single-shell region."""
    verts = curve.vertices if hasattr(curve, "vertices") else np.asarray(curve)
    if check_simple:
        from .maps import is_simple

        if not is_simple(verts):
            raise SelfIntersection("polyline is not simple")
    return Region([np.column_stack([np.real(verts), np.imag(verts)])])


def area(R):
    return R.area()


def vertical_cross_section(R, u, generic=False):
    """Section of ``R`` by the line ``Re w = u``.

    By default the exact right-hand limit is returned.  With ``generic=True``
    the line is instead nudged off vertex abscissas (by +2 snap_tol, then
    -2 snap_tol) so that every crossing is transversal, and
    :class:`DegenerateLine` is raised when both nudges fail.
    """
    if generic:
        xs = R.vertex_us()
        tol = R.snap_tol
        for cand in (u, u + 2 * tol, u - 2 * tol):
            if not np.any(np.abs(xs - cand) <= tol):
                return R.section(cand)
        raise DegenerateLine(f"u={u} sits on vertex abscissas after perturbation")
    return R.section(u)


def max_vertical_segment(R):
    """Longest vertical segment inside ``R`` and the abscissa carrying it.

    Between consecutive vertex abscissas every section interval has linearly
    varying endpoints, so the supremum is attained at a one-sided limit at
    some vertex abscissa.  Those limits are evaluated exactly; the reported
    ``u0`` is nudged one snap_tol into the open slab.  Ties go to the
    smallest ``u0``.
    """
    xs = R.vertex_us()
    tol = R.snap_tol
    right = R.sections(xs, "right").longest()
    left = R.sections(xs, "left").longest()
    cand_len = np.concatenate([right[:, 0], left[:, 0]])
    cand_u = np.concatenate([xs + tol, xs - tol])
    cand_iv = np.vstack([right[:, 1:], left[:, 1:]])
    best = cand_len.max()
    # exact max, smallest u among ties
    ties = np.flatnonzero(cand_len >= best - 1e-15 * max(1.0, best))
    i = ties[np.argmin(cand_u[ties])]
    return VerticalSegment(float(cand_len[i]), float(cand_u[i]), float(cand_iv[i, 0]),
                           float(cand_iv[i, 1]))


def steiner_symmetrize(R, grid=()):
    """Steiner symmetrization of ``R`` about the real axis.

    Each section of measure ``m`` is replaced by ``[-m/2, m/2]``.  The upper
    boundary ``m(u)/2`` is interpolated linearly through the grid abscissas
    and every vertex abscissa of ``R``; section measures of a polygon are
    piecewise linear between vertex abscissas, so area is preserved up to
    rounding.  Where ``m`` vanishes between shells the output is split.
    """
    x0, _, x1, _ = R.bounds
    g = np.asarray(grid, dtype=float)
    us = np.unique(np.concatenate([R.vertex_us(), g[(g > x0) & (g < x1)]]))
    mr = R.sections(us, "right").measures()
    ml = R.sections(us, "left").measures()
    pts = []
    for u, a, b in zip(us, ml, mr):
        pts.append((u, a / 2))
        if b != a:
            pts.append((u, b / 2))
    tol = R.snap_tol
    hs = np.array([h for _, h in pts])
    pos = np.flatnonzero(hs > tol)
    rings = []
    if len(pos):
        breaks = np.flatnonzero(np.diff(pos) > 1)
        for s, e in zip(np.concatenate([[pos[0]], pos[breaks + 1]]),
                        np.concatenate([pos[breaks], [pos[-1]]])):
            run = pts[s:e + 1]
            left = [(pts[s - 1][0], 0.0)] if s > 0 else []
            right = [(pts[e + 1][0], 0.0)] if e + 1 < len(pts) else []
            ring = left + [(u, -h) for u, h in run] + right + [(u, h) for u, h in reversed(run)]
            ring = np.array(ring)
            if len(_dedupe(ring, tol)) >= 3:
                rings.append(ring)
    return Region(rings, snap_tol=R.snap_tol)


# -- monotone reachability on a raster -------------------------------------------


@dataclass(frozen=True)
class GridReach:
    """Result of :func:`monotone_reachable_grid`."""

    step: float
    us: np.ndarray  # column centers
    reached: np.ndarray  # bool per column
    intervals: list  # [(u_lo, u_hi)] of contiguous reached columns

    def reachable(self, u):
        i = int(round(u / self.step)) - int(round(self.us[0] / self.step))
        return 0 <= i < len(self.us) and bool(self.reached[i])


def monotone_reachable_grid(R, step):
    """Columns of a raster of ``R`` reachable from the origin by monotone moves.

    Cells are squares of side ``step`` centred on ``step * (i, j)``; a cell is
    inside when its centre lies strictly inside ``R``.  Starting from the cell
    at the origin, a breadth-first search moves right/up/down (for u >= 0) or
    left/up/down (for u <= 0).  Because the search never moves backwards in
    ``u`` it is processed column by column, each column's inside cells
    grouped into vertical runs.
    """
    x0, _, x1, _ = R.bounds
    i_lo, i_hi = math.ceil(x0 / step), math.floor(x1 / step)
    cols = np.arange(i_lo, i_hi + 1)
    us = cols * step
    if not (i_lo <= 0 <= i_hi):
        raise OriginOutside("origin outside the u-extent of the region")
    batch = R.sections(us)

    def runs(i):
        iv = batch.intervals(i)
        # rows j with lo < j*step < hi
        jlo = np.floor(iv[:, 0] / step).astype(np.int64) + 1
        jhi = np.ceil(iv[:, 1] / step).astype(np.int64) - 1
        ok = jhi >= jlo
        return np.column_stack([jlo[ok], jhi[ok]])

    i0 = -i_lo
    start = runs(i0)
    seed = start[(start[:, 0] <= 0) & (start[:, 1] >= 0)]
    if not len(seed):
        raise OriginOutside("origin cell is not inside the region")
    reached = np.zeros(len(us), dtype=bool)
    reached[i0] = True
    for direction in (1, -1):
        prev = seed
        i = i0 + direction
        while 0 <= i < len(us) and len(prev):
            cur = runs(i)
            if len(cur):
                hit = (cur[:, 0][:, None] <= prev[:, 1][None, :]) & (
                    cur[:, 1][:, None] >= prev[:, 0][None, :])
                prev = cur[hit.any(axis=1)]
            else:
                prev = cur
            if len(prev):
                reached[i] = True
            i += direction
    intervals = []
    idx = np.flatnonzero(reached)
    if len(idx):
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate([[idx[0]], idx[breaks + 1]])
        ends = np.concatenate([idx[breaks], [idx[-1]]])
        intervals = [(float(us[a]), float(us[b])) for a, b in zip(starts, ends)]
    return GridReach(step, us, reached, intervals)


def locate_layer(batch, v):
    """Index of the section interval containing ``v[i]`` at ``batch.us[i]``; -1 if none."""
    v = np.asarray(v, dtype=float)
    n = len(batch.us)
    owner = np.repeat(np.arange(n), np.diff(batch.offsets))
    # crossings strictly below each query, counted by a merged stable sort
    keys_owner = np.concatenate([owner, np.arange(n)])
    keys_v = np.concatenate([batch.v, v])
    kind = np.concatenate([np.zeros(len(owner), dtype=np.int8), np.ones(n, dtype=np.int8)])
    order = np.lexsort((kind, keys_v, keys_owner))
    is_q = kind[order] == 1
    cum = np.cumsum(~is_q)
    qpos = order[is_q] - len(owner)
    below = np.empty(n, dtype=np.int64)
    below[qpos] = cum[is_q] - batch.offsets[qpos]
    return np.where(below % 2 == 1, below // 2, -1)


def clipped_measures(batch, lo, hi):
    """Per abscissa: measure of the section intersected with ``[lo[i], hi[i]]``."""
    n = len(batch.us)
    cnt = batch.counts()
    owner = np.repeat(np.arange(n), cnt)
    a, b = batch.v[0::2], batch.v[1::2]
    ov = np.minimum(b, np.asarray(hi)[owner]) - np.maximum(a, np.asarray(lo)[owner])
    return np.bincount(owner, weights=np.maximum(ov, 0.0), minlength=n)
