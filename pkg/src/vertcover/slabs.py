"""
Vertical slab decomposition of B(rho, f) and the combinatorial checks built on it.

A system of vertical lines cuts ``B(rho) ∩ {u > 0}`` into faces.  Once the
lines include every abscissa where the boundary turns back in ``u``, each
slab between adjacent lines is a vertical stack of faces whose upper and
lower boundaries cross the whole slab.  A face is then identified by its
slab and its rank ``layer`` in the stack, and its boundary pieces on the two
bounding lines are the continua ``alpha`` (left) and ``beta`` (right).

The negative half-plane is handled by mirroring: all internal work happens
in "working" coordinates where the side of interest is ``u > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLine, NoOriginCell, OriginOutside
from .geometry import Region, region_from_polyline
from .maps import trace_level_curve, u_extent_many, vertical_tangent_phis


@dataclass(frozen=True)
class LineSystem:
    u_values: np.ndarray
    delta: float
    includes_tangents: bool
    tangent_us: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tangent_phis: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max_gap(self):
        return float(np.max(np.diff(self.u_values))) if len(self.u_values) > 1 else 0.0


@dataclass(frozen=True)
class Continuum:
    u: float
    v_lo: float
    v_hi: float

    @property
    def measure(self):
        return self.v_hi - self.v_lo


@dataclass
class SlabCell:
    """One face D of the decomposition, in working coordinates."""

    index: int  # k after ordering, 0 for unordered/unreachable cells
    slab: int
    layer: int
    a: float
    b: float
    alpha: Continuum
    beta: Continuum
    r_of_D: float = math.nan
    reachable: bool = False
    parent: int = -1  # id of the reachable face this one was reached from
    ident: int = -1


def build_line_system(f, rho, delta, tangent_grid=4096, fine_window=None):
    """Vertical tangents of gamma(rho, f) plus a pitch-``delta`` grid anchored at 0.

    With ``fine_window = (lo, hi)`` the pitch ``delta`` is used only on that
    u-range and 256 coarse steps cover the rest; faces outside the window then
    have r(D) above every radius whose curve stays inside it.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if delta <= 0:
        raise ValueError("delta must be positive")
    phis = vertical_tangent_phis(f, rho, tangent_grid)
    tus = f(rho * np.exp(1j * phis)).real if len(phis) else np.zeros(0)
    umin = min(tus.min(), 0.0) if len(tus) else u_extent_many(f, [rho], -1.0)[0] * -1
    umax = max(tus.max(), 0.0) if len(tus) else u_extent_many(f, [rho], 1.0)[0]
    grid = np.arange(math.ceil(umin / delta), math.floor(umax / delta) + 1) * delta
    if fine_window is not None:
        lo, hi = fine_window
        coarse = max(delta, (umax - umin) / 256)
        outer = np.arange(math.ceil(umin / coarse), math.floor(umax / coarse) + 1) * coarse
        lo_i, hi_i = math.floor(max(lo, umin) / delta), math.ceil(min(hi, umax) / delta)
        grid = np.arange(lo_i, hi_i + 1) * delta
        grid = np.unique(np.concatenate([grid, outer[(outer < grid[0]) | (outer > grid[-1])]]))
    return LineSystem(_merge_lines(tus, grid, 1e-9 * max(1.0, umax - umin)), float(delta), True,
                      np.sort(tus), np.sort(phis))


def _merge_lines(primary, secondary, tol):
    """Union of two abscissa sets; secondary values within ``tol`` of a primary one are dropped."""
    primary = np.unique(np.asarray(primary, dtype=float))
    secondary = np.asarray(secondary, dtype=float)
    if len(primary) and len(secondary):
        j = np.clip(np.searchsorted(primary, secondary), 1, len(primary)) - 1
        near = np.abs(primary[j] - secondary) <= tol
        j2 = np.clip(j + 1, 0, len(primary) - 1)
        near |= np.abs(primary[j2] - secondary) <= tol
        secondary = secondary[~near]
    return np.unique(np.concatenate([primary, secondary]))


def region_for(f, rho, tol=1e-5, lines=None):
    """B(rho, f) as a region whose boundary has vertices at its vertical tangents."""
    extra = lines.tangent_phis if lines is not None else vertical_tangent_phis(f, rho)
    return region_from_polyline(trace_level_curve(f, rho, tol, extra_phis=extra))


def turning_abscissas(R):
    """Vertex abscissas where a ring of ``R`` reverses direction in u."""
    out = []
    for ring in R.shells + R.holes:
        x = ring[:, 0]
        dprev = x - np.roll(x, 1)
        dnext = np.roll(x, -1) - x
        out.append(x[dprev * dnext <= 0])
    return np.unique(np.concatenate(out)) if out else np.zeros(0)


@dataclass
class Decomposition:
    """Faces of ``region ∩ {u > 0}`` (working coordinates) cut by ``lines``."""

    side: int
    region: Region  # working coordinates
    lines: np.ndarray  # working abscissas, starting at 0
    cells: list  # every face
    rho: float = math.nan
    f: object = None

    @property
    def reachable(self):
        return [c for c in self.cells if c.reachable]

    @property
    def ordered(self):
        return sorted((c for c in self.cells if c.index > 0), key=lambda c: c.index)

    def face_intervals(self, cells, us, side="right"):
        """Face interval of each cell at the matching abscissa, shape (n, 2)."""
        us = np.asarray(us, dtype=float)
        batch = self.region.sections(us, side)
        out = np.empty((len(us), 2))
        for i, c in enumerate(cells):
            iv = batch.intervals(i)
            if c.layer >= len(iv):
                raise DegenerateLine(f"face layer {c.layer} missing at u={us[i]}")
            out[i] = iv[c.layer]
        return out

    def to_real(self, u):
        return self.side * np.asarray(u)

    def polygon(self, cell):
        """Boundary of the face closure, exact for the polygonal region."""
        xs = self.region.vertex_us()
        inner = xs[(xs > cell.a) & (xs < cell.b)]
        us = np.concatenate([[cell.a], inner, [cell.b]])
        iv = np.empty((len(us), 2))
        iv[0] = (cell.alpha.v_lo, cell.alpha.v_hi)
        iv[-1] = (cell.beta.v_lo, cell.beta.v_hi)
        if len(inner):
            iv[1:-1] = self.face_intervals([cell] * len(inner), inner)
        lower = np.column_stack([us, iv[:, 0]])
        upper = np.column_stack([us[::-1], iv[::-1, 1]])
        poly = np.vstack([lower, upper])
        poly[:, 0] *= self.side
        return poly

    def to_dict(self):
        cells = []
        for c in self.cells:
            alpha_u, beta_u = self.side * c.a, self.side * c.b
            cells.append({
                "k": c.index, "slab": c.slab, "layer": c.layer,
                "u_interval": sorted([float(alpha_u), float(beta_u)]),
                "alpha": [float(alpha_u), c.alpha.v_lo, c.alpha.v_hi],
                "beta": [float(beta_u), c.beta.v_lo, c.beta.v_hi],
                "r_of_D": None if math.isnan(c.r_of_D) else c.r_of_D,
                "reachable": c.reachable,
                "polygon": self.polygon(c).tolist(),
            })
        return {"side": "positive" if self.side > 0 else "negative",
                "lines": [float(x) for x in self.side * self.lines], "cells": cells}


def _overlap(a_lo, a_hi, b_lo, b_hi):
    return np.minimum(a_hi, b_hi) - np.maximum(a_lo, b_lo)


def decompose(R_rho, lines, side="positive", add_turning=True):
    """Split ``R_rho`` on one side of the imaginary axis into slab faces.

    Parameters
    ----------
    R_rho : Region
        The image region (real coordinates).
    lines : LineSystem or array_like
        Abscissas of the cutting lines (real coordinates).
    side : {"positive", "negative"}
    add_turning : bool
        Add the region's own turning abscissas to the lines; required for
        faces to be well defined when ``lines`` misses a tangent.

    Reachable faces are those joined to w = 0 by a curve ``v = v(u)``: the
    face whose left continuum on u = 0 contains the origin, then every face
    whose left continuum overlaps the right continuum of a reachable face.
    """
    sgn = 1 if side in ("positive", 1, "+") else -1
    W = R_rho if sgn > 0 else R_rho.mirrored()
    if not W.contains(0j):
        raise OriginOutside("w = 0 is not inside the region")
    u_vals = lines.u_values if isinstance(lines, LineSystem) else np.asarray(lines, dtype=float)
    u_vals = sgn * np.asarray(u_vals, dtype=float)
    umax = W.bounds[2]
    tol = W.snap_tol
    base = [0.0, umax]
    if add_turning:
        base = np.concatenate([base, turning_abscissas(W)])
    lw = _merge_lines(np.asarray(base), u_vals, tol)
    lw = lw[(lw >= 0) & (lw <= umax)]
    left = W.sections(lw[:-1], "right")
    right = W.sections(lw[1:], "left")
    nL, nR = left.counts(), right.counts()
    if np.any(nL != nR):
        bad = int(np.flatnonzero(nL != nR)[0])
        raise DegenerateLine(f"slab [{lw[bad]}, {lw[bad + 1]}] contains a turning point")
    cells = []
    by_slab = []
    for s in range(len(lw) - 1):
        ivL, ivR = left.intervals(s), right.intervals(s)
        ids = []
        for j in range(len(ivL)):
            c = SlabCell(0, s, j, float(lw[s]), float(lw[s + 1]),
                         Continuum(float(lw[s]), float(ivL[j, 0]), float(ivL[j, 1])),
                         Continuum(float(lw[s + 1]), float(ivR[j, 0]), float(ivR[j, 1])),
                         ident=len(cells))
            ids.append(len(cells))
            cells.append(c)
        by_slab.append(ids)
    # reachability
    origin = [i for i in (by_slab[0] if by_slab else [])
              if cells[i].alpha.v_lo <= 0.0 <= cells[i].alpha.v_hi]
    for i in origin:
        cells[i].reachable = True
    for s in range(1, len(by_slab)):
        prev = [cells[i] for i in by_slab[s - 1] if cells[i].reachable]
        if not prev:
            break
        blo = np.array([p.beta.v_lo for p in prev])
        bhi = np.array([p.beta.v_hi for p in prev])
        for i in by_slab[s]:
            c = cells[i]
            ov = _overlap(c.alpha.v_lo, c.alpha.v_hi, blo, bhi)
            if np.any(ov > tol):
                c.reachable = True
                c.parent = prev[int(np.argmax(ov))].ident
    return Decomposition(sgn, W, lw, cells)


# -- r(D) and ordering ----------------------------------------------------------


def default_r_grid(rho, step=1e-4):
    n = max(2, int(math.ceil(rho / step)))
    return np.linspace(rho / n, rho, n)


class _ExtentTable:
    """Cached, lazily evaluated max of ``side * Re f`` on |z| = r over an r-grid."""

    def __init__(self, f, sign, r_grid):
        self.f, self.sign, self.r = f, sign, np.asarray(r_grid, dtype=float)
        self._vals = np.full(len(self.r), np.nan)

    def __call__(self, idx):
        idx = np.atleast_1d(idx)
        miss = idx[np.isnan(self._vals[idx])]
        if len(miss):
            self._vals[miss] = u_extent_many(self.f, self.r[miss], self.sign)
        return self._vals[idx]

    def all(self):
        return self(np.arange(len(self.r)))


def compute_r_of_D(cell, f, rho, r_grid=None, side=1, table=None):
    """Smallest grid radius r for which every line through the closed cell meets B(r).

    B(r) is connected and contains 0, so its lines are exactly
    ``u <= max Re f(|z| = r)``; every line through the cell meets B(r) iff
    the right line ``u = b`` does.  Bisection over the sorted grid; ``rho``
    when no grid radius suffices.
    """
    if table is None:
        table = _ExtentTable(f, side, default_r_grid(rho) if r_grid is None else r_grid)
    tol = 1e-12 * max(1.0, abs(cell.b))
    lo, hi = 0, len(table.r) - 1
    if table(hi)[0] < cell.b - tol:
        return float(rho)
    while lo < hi:
        mid = (lo + hi) // 2
        if table(mid)[0] >= cell.b - tol:
            hi = mid
        else:
            lo = mid + 1
    return float(table.r[lo])


def assign_r_of_D(decomp, f, rho, r_grid=None):
    table = _ExtentTable(f, decomp.side, default_r_grid(rho) if r_grid is None else r_grid)
    vals = table.all()
    bs = np.array([c.b for c in decomp.cells])
    idx = np.searchsorted(np.maximum.accumulate(vals), bs - 1e-12 * np.maximum(1.0, np.abs(bs)))
    for c, i in zip(decomp.cells, idx):
        c.r_of_D = float(table.r[i]) if i < len(table.r) else float(rho)
    decomp.rho, decomp.f = float(rho), f
    return decomp


def order_cells(cells):
    """Index reachable cells: the origin face first, then ascending (r(D), a, alpha.v_lo)."""
    reach = [c for c in cells if c.reachable]
    origin = [c for c in reach if c.slab == 0 and c.a == 0.0 and c.alpha.v_lo <= 0.0 <= c.alpha.v_hi]
    if not origin:
        raise NoOriginCell("no reachable face has the origin on its closure")
    first = origin[0]
    rest = sorted((c for c in reach if c is not first), key=lambda c: (c.r_of_D, c.a, c.alpha.v_lo))
    for c in cells:
        c.index = 0
    for k, c in enumerate([first] + rest, 1):
        c.index = k
    return [first] + rest


def build_decomposition(f, rho, delta, side="positive", tol=1e-5, lines=None, region=None):
    """Lines, faces, r(D) and ordering for one side of B(rho, f)."""
    lines = lines if lines is not None else build_line_system(f, rho, delta)
    region = region if region is not None else region_for(f, rho, tol, lines)
    d = decompose(region, lines, side)
    assign_r_of_D(d, f, rho)
    order_cells(d.cells)
    d.lines_system = lines
    return d


# -- checks on B(r) ---------------------------------------------------------------


def _working(decomp, region_r):
    return region_r if decomp.side > 0 else region_r.mirrored()


def _meet_measure(face_iv, batch, i):
    """Measure of (B(r) section i) ∩ face interval, and whether the closed sets meet."""
    iv = batch.intervals(i)
    if not len(iv):
        return 0.0, False
    ov = _overlap(iv[:, 0], iv[:, 1], face_iv[0], face_iv[1])
    return float(np.sum(np.maximum(ov, 0.0))), bool(np.any(ov >= 0.0))


@dataclass
class Prop1Report:
    violations: list  # (k, u_inner, u_outer)
    checked: int

    @property
    def ok(self):
        return not self.violations


def check_prop1(decomp, region_r, n_samples=9):
    """Lines meeting closure(D_k) ∩ closure(B(r)) must form an interval starting at alpha_k."""
    Wr = _working(decomp, region_r)
    cells = decomp.ordered
    if not cells:
        return Prop1Report([], 0)
    t = np.linspace(0.0, 1.0, n_samples)
    us, owners, sides = [], [], []
    for c in cells:
        for ti in t:
            us.append(c.a + ti * (c.b - c.a))
            owners.append(c)
            sides.append("left" if ti == 1.0 else "right")
    us = np.array(us)
    sides = np.array(sides)
    face = np.empty((len(us), 2))
    meets = np.zeros(len(us), dtype=bool)
    for sd in ("right", "left"):
        sel = np.flatnonzero(sides == sd)
        if not len(sel):
            continue
        face[sel] = decomp.face_intervals([owners[i] for i in sel], us[sel], sd)
        b = Wr.sections(us[sel], sd)
        for j, i in enumerate(sel):
            meets[i] = _meet_measure(face[i], b, j)[1]
    violations = []
    for n, c in enumerate(cells):
        m = meets[n * n_samples:(n + 1) * n_samples]
        u = us[n * n_samples:(n + 1) * n_samples]
        for outer in np.flatnonzero(m):
            miss = np.flatnonzero(~m[:outer])
            if len(miss):
                violations.append((c.index, float(u[miss[0]]), float(u[outer])))
                break
    return Prop1Report(violations, len(us))


def continuum_measures(decomp, region_r):
    """mes B(r) ∩ alpha_k and mes B(r) ∩ beta_k for ordered cells (arrays indexed k-1)."""
    Wr = _working(decomp, region_r)
    cells = decomp.ordered
    ua = np.array([c.a for c in cells])
    ub = np.array([c.b for c in cells])
    ba, bb = Wr.sections(ua, "right"), Wr.sections(ub, "right")
    ma = np.array([_meet_measure((c.alpha.v_lo, c.alpha.v_hi), ba, i)[0] for i, c in enumerate(cells)])
    mb = np.array([_meet_measure((c.beta.v_lo, c.beta.v_hi), bb, i)[0] for i, c in enumerate(cells)])
    return ma, mb


@dataclass(frozen=True)
class Prop2Result:
    k: int
    lhs: float
    rhs: float
    holds: bool

    @property
    def slack(self):
        return self.rhs - self.lhs


def check_prop2(decomp, region_r, k=None, measures=None):
    """Sum_{m>=k} mes B(r)∩beta_m <= Sum_{m>=k+1} mes B(r)∩alpha_m.

    Returns one :class:`Prop2Result` for ``k`` or a list over every k.
    """
    ma, mb = measures if measures is not None else continuum_measures(decomp, region_r)
    n = len(ma)
    # suffix sums
    sb = np.concatenate([np.cumsum(mb[::-1])[::-1], [0.0]])
    sa = np.concatenate([np.cumsum(ma[::-1])[::-1], [0.0]])
    ks = range(1, n + 1) if k is None else [k]
    out = []
    for kk in ks:
        if not 1 <= kk <= n:
            raise ValueError(f"k={kk} outside 1..{n}")
        lhs, rhs = float(sb[kk - 1]), float(sa[kk])
        out.append(Prop2Result(kk, lhs, rhs, lhs <= rhs + 1e-9))
    return out if k is None else out[0]


def count_straddling(decomp, region_r):
    """Cells whose alpha meets closure(B(r)) while beta does not."""
    Wr = _working(decomp, region_r)
    cells = decomp.ordered
    ba = Wr.sections([c.a for c in cells], "right")
    bb = Wr.sections([c.b for c in cells], "left")
    n = 0
    for i, c in enumerate(cells):
        ma = _meet_measure((c.alpha.v_lo, c.alpha.v_hi), ba, i)[1]
        mb = _meet_measure((c.beta.v_lo, c.beta.v_hi), bb, i)[1]
        n += ma and not mb
    return n


def reachable_u_intervals(decomp):
    """Union of the u-intervals of reachable faces, in real coordinates."""
    iv = sorted((c.a, c.b) for c in decomp.cells if c.reachable)
    merged = []
    for a, b in iv:
        if merged and a <= merged[-1][1] + decomp.region.snap_tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    out = [(decomp.side * a, decomp.side * b) for a, b in merged]
    return [tuple(sorted(x)) for x in out]


def monotone_curve(R, u_target, v_lo=-math.inf, v_hi=math.inf):
    """An x-monotone polyline in closure(R) from 0 to the line u = u_target.

    Uses every vertex abscissa as a cutting line, so faces are trapezoids
    and straight pieces between crossing points stay inside.  Returns a
    complex vertex array ending on ``[v_lo, v_hi]`` at ``u_target``, or
    ``None`` when the target is not monotone-reachable.
    """
    side = "positive" if u_target >= 0 else "negative"
    sgn = 1 if u_target >= 0 else -1
    W = R if sgn > 0 else R.mirrored()
    ut = abs(u_target)
    lines = np.concatenate([W.vertex_us(), [ut]])
    d = decompose(R, sgn * lines, side)
    if ut == 0.0:
        return np.array([0j])
    hits = [c for c in d.cells if c.reachable and c.b == ut and
            _overlap(c.beta.v_lo, c.beta.v_hi, v_lo, v_hi) >= 0]
    if not hits:
        hits = [c for c in d.cells if c.reachable and c.a <= ut <= c.b and
                _overlap(min(c.alpha.v_lo, c.beta.v_lo), max(c.alpha.v_hi, c.beta.v_hi), v_lo, v_hi) >= 0]
        if not hits:
            return None
    end = hits[0]
    chain = [end]
    while chain[-1].parent >= 0:
        chain.append(d.cells[chain[-1].parent])
    chain.reverse()
    pts = [0j]
    for prev, nxt in zip(chain[:-1], chain[1:]):
        lo = max(prev.beta.v_lo, nxt.alpha.v_lo)
        hi = min(prev.beta.v_hi, nxt.alpha.v_hi)
        pts.append(complex(prev.b, 0.5 * (lo + hi)))
    lo = max(end.beta.v_lo, v_lo)
    hi = min(end.beta.v_hi, v_hi)
    pts.append(complex(end.b, 0.5 * (lo + hi)))
    pts = np.array(pts)
    return sgn * pts.real + 1j * pts.imag
