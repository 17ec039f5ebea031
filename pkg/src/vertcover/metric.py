"""
The strip metric, its transport into B(rho, f), and the inequalities built on it.

The extremal metric of the strip ``|v| < pi/4`` is the push-forward of the
logarithmic metric ``|dz| / (2 pi |z|)`` under ``p(z) = artanh z``:

    mu(w) = |(p^-1)'(w) / p^-1(w)| / (2 pi) = 1 / (pi |sinh 2w|).

``mu_plus`` moves each point of a face D_k to its Steiner-symmetrized
position and then translates the symmetrized face so the faces sit side by
side in their r(D) order.  Outside the closed strip ``mu`` is extended by
zero, which is what an admissible metric for the strip domain looks like;
under the contradiction hypothesis (no vertical segment longer than pi/2)
transported points never leave the strip anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    AssemblyGap,
    DomainError,
    ExclusionMissing,
    LiftNegative,
    NoContainmentRadius,
    NotATranslate,
    OddLayerCount,
    Singularity,
    SingularityOnPath,
)
from .geometry import Region, clipped_measures, locate_layer
from .maps import QUARTER_PI, strip_map, trace_level_curve, u_extent
from .quadrature import AREA_DEFAULT, LINE_DEFAULT, gauss_legendre, integrate_intervals
from .slabs import build_decomposition, build_line_system, continuum_measures, region_for

STRIP_SLACK = 1e-12


# -- the metric -------------------------------------------------------------------


def mu(w):
    """Strip metric density ``1 / (pi |sinh 2w|)`` on the closed strip."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w.imag) > QUARTER_PI + STRIP_SLACK):
        raise DomainError("mu is defined on |Im w| <= pi/4")
    if np.any(w == 0):
        raise Singularity("mu has a pole at w = 0")
    out = 1.0 / (math.pi * np.abs(np.sinh(2 * w)))
    return out if out.ndim else float(out)


def mu_from_inverse(w):
    """``|d/dw ln p^-1(w)| / (2 pi)`` evaluated literally through tanh."""
    w = np.asarray(w, dtype=complex)
    t = np.tanh(w)
    dt = 1.0 / np.cosh(w) ** 2
    out = np.abs(dt / t) / (2 * math.pi)
    return out if out.ndim else float(out)


def mu_ext(w):
    """``mu`` extended by zero outside the closed strip; +inf at the origin."""
    w = np.asarray(w, dtype=complex)
    inside = np.abs(w.imag) <= QUARTER_PI + STRIP_SLACK
    with np.errstate(divide="ignore"):
        val = 1.0 / (math.pi * np.abs(np.sinh(2 * w)))
    return np.where(inside, val, 0.0)


def mu_clamped(w):
    """``mu`` at ``u + i clip(v, -pi/4, pi/4)``: curve pieces above the strip count on its edge."""
    w = np.asarray(w, dtype=complex)
    v = np.clip(w.imag, -QUARTER_PI, QUARTER_PI)
    with np.errstate(divide="ignore"):
        return 1.0 / (math.pi * np.abs(np.sinh(2 * (w.real + 1j * v))))


def mu_sq_strip_integral(x, s1, s2):
    """Closed form of the integral of mu(x + is)^2 ds over [s1, s2] ∩ [0, pi/4].

    With A = sinh^2(2x) and theta = 2s the integrand is
    1 / (pi^2 (A + sin^2 theta)), whose antiderivative is
    arctan(sqrt((A+1)/A) tan theta) / sqrt(A(A+1)); the difference of two
    arctans is taken in one atan2 to stay accurate as A -> 0.
    """
    x = np.asarray(x, dtype=float)
    t1 = 2 * np.clip(s1, 0.0, QUARTER_PI)
    t2 = 2 * np.clip(s2, 0.0, QUARTER_PI)
    t2 = np.maximum(t1, t2)
    far = np.abs(x) > 150  # mu^2 ~ e^{-4|x|} underflows there
    A = np.sinh(2 * np.where(far, 0.0, x)) ** 2
    q = np.sqrt(A) * np.sqrt(A + 1)
    s1_, c1, s2_, c2 = np.sin(t1), np.cos(t1), np.sin(t2), np.cos(t2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.arctan2(q * np.sin(t2 - t1), A * c1 * c2 + (A + 1) * s1_ * s2_)
        val = np.where(q > 1e-150, ang / q, c1 / s1_ - c2 / s2_)
    return np.where((t2 > t1) & ~far, val / (2 * math.pi**2), 0.0)


# -- curves and line integrals ------------------------------------------------------


@dataclass(frozen=True)
class LevelCurve:
    """The exact curve phi -> f(r e^{i phi}) on [phi0, phi1]."""

    f: object
    r: float
    phi0: float = 0.0
    phi1: float = 2 * math.pi

    def point(self, phi):
        return self.f(self.r * np.exp(1j * phi))

    def speed(self, phi):
        z = self.r * np.exp(1j * phi)
        return self.r * np.abs(self.f.deriv(z))


def _segments(vertices, closed):
    v = np.asarray(vertices, dtype=complex)
    if closed:
        return v, np.roll(v, -1)
    return v[:-1], v[1:]


def _point_segment_distance(p, a, b):
    d = b - a
    L2 = (d * d.conjugate()).real
    t = np.clip(((p - a) * d.conjugate()).real / np.where(L2 > 0, L2, 1.0), 0, 1)
    return np.abs(p - (a + t * d))


def line_integral(curve, metric, cfg=LINE_DEFAULT, closed=None, singular_points=(0j,)):
    """Integral of ``metric(w) |dw|`` along a polyline or a :class:`LevelCurve`.

    Polylines are complex vertex arrays (or objects with ``.vertices``, which
    are treated as closed).  Adaptive G7-K15 per segment.
    """
    if isinstance(curve, LevelCurve):
        for s in singular_points:
            phis = np.linspace(curve.phi0, curve.phi1, 4097)
            if np.min(np.abs(curve.point(phis) - s)) < 1e-12:
                raise SingularityOnPath(f"curve passes through {s}")

        def fun(phi, _):
            return metric(curve.point(phi)) * curve.speed(phi)

        v, _ = integrate_intervals(fun, [curve.phi0], [curve.phi1], cfg.abs_tol, cfg.rel_tol,
                                   cfg.max_subdivisions)
        return float(v[0])
    if hasattr(curve, "vertices"):
        verts, closed = curve.vertices, True if closed is None else closed
    else:
        verts, closed = curve, bool(closed)
    a, b = _segments(verts, closed)
    if not len(a):
        return 0.0
    for s in singular_points:
        if np.min(_point_segment_distance(s, a, b)) < 1e-12:
            raise SingularityOnPath(f"polyline passes within 1e-12 of {s}")
    d = b - a
    L = np.abs(d)
    tol = cfg.abs_tol / max(len(a), 1)

    def fun(t, owner):
        return metric(a[owner] + t * d[owner]) * L[owner]

    v, _ = integrate_intervals(fun, np.zeros(len(a)), np.ones(len(a)), tol, cfg.rel_tol,
                               cfg.max_subdivisions)
    return float(np.sum(v))


# -- area integrals -----------------------------------------------------------------


def _interval_difference(A, B):
    """Sorted disjoint intervals A minus B."""
    out = []
    for lo, hi in A:
        cur = lo
        for blo, bhi in B:
            if bhi <= cur or blo >= hi:
                continue
            if blo > cur:
                out.append((cur, blo))
            cur = max(cur, bhi)
            if cur >= hi:
                break
        if cur < hi:
            out.append((cur, hi))
    return out


def area_integral(region, exclusion, metric_squared, cfg=AREA_DEFAULT, singular_at_origin=True):
    """Integral of ``metric_squared`` over ``region`` minus ``exclusion``.

    Iterated quadrature: the outer u-integral is split at every vertex
    abscissa of both regions (where the inner integral stops being smooth)
    and each piece is integrated adaptively; the inner v-integrals run over
    the intervals of section(region) minus section(exclusion).
    """
    if exclusion is None:
        if singular_at_origin:
            raise ExclusionMissing("metric is singular at 0; an exclusion region is required")
        exclusion_us = np.zeros(0)
    else:
        if singular_at_origin and not exclusion.contains(0j):
            raise ExclusionMissing("exclusion does not contain w = 0")
        exclusion_us = exclusion.vertex_us()
    x0, _, x1, _ = region.bounds
    ev = np.unique(np.concatenate([region.vertex_us(), exclusion_us]))
    ev = ev[(ev >= x0) & (ev <= x1)]
    gx, gw = gauss_legendre(12)

    def inner(us):
        us = np.asarray(us)
        rb = region.sections(us)
        eb = exclusion.sections(us) if exclusion is not None else None
        lo, hi, own = [], [], []
        for i in range(len(us)):
            ivs = [tuple(x) for x in rb.intervals(i)]
            if eb is not None:
                ivs = _interval_difference(ivs, [tuple(x) for x in eb.intervals(i)])
            for a, b in ivs:
                lo.append(a)
                hi.append(b)
                own.append(i)
        if not lo:
            return np.zeros(len(us))
        lo, hi, own = np.array(lo), np.array(hi), np.array(own)
        vals, _ = integrate_intervals(lambda v, o: metric_squared(us[own[o]] + 1j * v),
                                      lo, hi, cfg.abs_tol * 1e-2, cfg.rel_tol)
        return np.bincount(own, weights=vals, minlength=len(us))

    def outer(u, owner):
        return inner(u.ravel()).reshape(u.shape)

    vals, _ = integrate_intervals(outer, ev[:-1], ev[1:], cfg.abs_tol, cfg.rel_tol,
                                  cfg.max_subdivisions)
    return float(np.sum(vals))


# -- transport ----------------------------------------------------------------------


FULL, PARTIAL, EMPTY = "full", "partial", "empty"


@dataclass
class TransportPlan:
    """Symmetrize-and-translate transport of one side of B(rho) at radius r."""

    decomp: object
    region_r: Region  # working coordinates
    r: float
    cells: list  # ordered cells
    sigma: np.ndarray  # H_k translations
    alpha_mes: np.ndarray  # mes B(r) ∩ alpha_k
    beta_mes: np.ndarray  # mes B(r) ∩ beta_k
    status: list
    b_r: np.ndarray  # b_k(r)
    v_star: list  # per cell: (us, v*) samples on [a_k, b_k(r)], None if empty
    k_prime: int
    n_prime: int
    contiguous: bool
    lifts: np.ndarray
    shifts: np.ndarray
    gamma: list = field(default_factory=list)  # gamma_k(r), transported
    gamma_prime: list = field(default_factory=list)
    gamma_star: list = field(default_factory=list)

    @property
    def side(self):
        return self.decomp.side

    def gamma_star_polyline(self):
        pieces = [g for g in self.gamma_star if g is not None and len(g)]
        return np.concatenate(pieces) if pieces else np.zeros(0, dtype=complex)


def _clip_to_strip(poly):
    """Replace the parts of a polyline above v = pi/4 by pieces of that line."""
    if not len(poly):
        return poly
    out = [poly[0]]
    for a, b in zip(poly[:-1], poly[1:]):
        if (a.imag - QUARTER_PI) * (b.imag - QUARTER_PI) < 0:
            t = (QUARTER_PI - a.imag) / (b.imag - a.imag)
            out.append(complex(a.real + t * (b.real - a.real), QUARTER_PI))
        out.append(b)
    out = np.array(out)
    return out.real + 1j * np.minimum(out.imag, QUARTER_PI)


def build_transport(decomp, region_r, r, f=None, gap_tol=1e-9):
    """Build the transport plan at radius ``r`` for an ordered decomposition.

    ``region_r`` is B(r, f) in real coordinates.  Raises
    :class:`LiftNegative` when a lift amount is below ``-1e-9`` and
    :class:`AssemblyGap` when the leftward-translated pieces do not join.
    """
    Wr = region_r if decomp.side > 0 else region_r.mirrored()
    cells = decomp.ordered
    n = len(cells)
    a = np.array([c.a for c in cells])
    b = np.array([c.b for c in cells])
    sigma = np.zeros(n)
    if n:
        sigma[0] = -a[0]
        for k in range(1, n):
            sigma[k] = b[k - 1] + sigma[k - 1] - a[k]
    ma, mb = continuum_measures(decomp, region_r)
    tiny = Wr.snap_tol
    status = [FULL if mb[k] > tiny else (EMPTY if ma[k] <= tiny else PARTIAL) for k in range(n)]

    # b_k(r) for partial faces: rightmost vertex of B(r) inside the face
    xs = np.column_stack([np.concatenate([s[:, 0] for s in Wr.shells]),
                          np.concatenate([s[:, 1] for s in Wr.shells])])
    xs = xs[xs[:, 0] >= 0]
    by_slab = {}
    for k, c in enumerate(cells):
        by_slab.setdefault(c.slab, []).append(k)
    slab_of = np.searchsorted(decomp.lines, xs[:, 0], "right") - 1
    # face containing each B(r) vertex
    vb = decomp.region.sections(xs[:, 0])
    layer = locate_layer(vb, xs[:, 1])
    b_r = np.where(np.array([s == FULL for s in status]), b, a)
    cell_of = {(c.slab, c.layer): k for k, c in enumerate(cells)}
    inner_us = {k: [] for k in range(n)}
    for (u, _), s, j in zip(xs, slab_of, layer):
        k = cell_of.get((int(s), int(j)))
        if k is None:
            continue
        if a[k] < u < b[k]:
            inner_us[k].append(u)
        if status[k] == PARTIAL:
            b_r[k] = max(b_r[k], u)
    # v*_k samples
    v_star = [None] * n
    req_u, req_k = [], []
    for k in range(n):
        if status[k] == EMPTY:
            continue
        us = np.unique([u for u in inner_us[k] if u < b_r[k]])
        req_u.extend(us)
        req_k.extend([k] * len(us))
        v_star[k] = us
    if req_u:
        req_u = np.array(req_u)
        face = decomp.face_intervals([cells[k] for k in req_k], req_u)
        m = clipped_measures(Wr.sections(req_u), face[:, 0], face[:, 1])
    pos = 0
    for k in range(n):
        if v_star[k] is None:
            continue
        us = v_star[k]
        vals = 0.5 * m[pos:pos + len(us)] if len(us) else np.zeros(0)
        pos += len(us)
        end = 0.5 * mb[k] if status[k] == FULL else 0.0
        v_star[k] = (np.concatenate([[a[k]], us, [b_r[k]]]),
                     np.concatenate([[0.5 * ma[k]], vals, [end]]))
    active = [k for k in range(n) if status[k] != EMPTY]
    n_prime = (max(active) + 1) if active else 0
    not_full = [k for k in range(n) if status[k] != FULL]
    k_prime = (min(not_full) + 1) if not_full else n + 1
    contiguous = all(s == FULL for s in status[:k_prime - 1]) and all(
        s == PARTIAL for s in status[k_prime - 1:n_prime]) and all(s == EMPTY for s in status[n_prime:])
    # lifts: sum_{m=k+1}^{n'} v_m(a_m) - sum_{m=k}^{n'} v_m(b_m(r))
    va = 0.5 * ma[:n_prime]
    vb_end = np.array([0.5 * mb[k] if status[k] == FULL else 0.0 for k in range(n_prime)])
    suf_a = np.concatenate([np.cumsum(va[::-1])[::-1], [0.0]])
    suf_b = np.concatenate([np.cumsum(vb_end[::-1])[::-1], [0.0]])
    lifts = np.array([suf_a[k + 1] - suf_b[k] for k in range(n_prime)])
    if np.any(lifts < -1e-9):
        k = int(np.argmin(lifts))
        raise LiftNegative(f"lift of gamma_{k + 1} is {lifts[k]:.3e} < 0")
    lifts = np.maximum(lifts, 0.0)
    gaps = np.array([(b[k] - b_r[k]) for k in range(n_prime)])
    shifts = np.concatenate([[0.0], np.cumsum(gaps)])[:n_prime]
    plan = TransportPlan(decomp, Wr, float(r), cells, sigma, ma, mb, status, b_r, v_star,
                         k_prime, n_prime, contiguous, lifts, shifts)
    for k in range(n):
        if v_star[k] is None or k >= n_prime:
            plan.gamma.append(None)
            plan.gamma_prime.append(None)
            plan.gamma_star.append(None)
            continue
        us, vs = v_star[k]
        g = (us + sigma[k]) + 1j * vs
        gp = _clip_to_strip(g + 1j * lifts[k])
        plan.gamma.append(g)
        plan.gamma_prime.append(gp)
        plan.gamma_star.append(gp - shifts[k])
    pieces = [g for g in plan.gamma_star if g is not None]
    scale = max(1.0, max((np.max(np.abs(p)) for p in pieces), default=1.0))
    for p, q in zip(pieces[:-1], pieces[1:]):
        if abs(p[-1] - q[0]) > gap_tol * scale:
            raise AssemblyGap(f"gamma* pieces miss by {abs(p[-1] - q[0]):.3e}")
    return plan


# -- mu_plus ------------------------------------------------------------------------


def _cell_lookup(plan, us, vs):
    """Ordered-cell index (or -1) and face interval for working points."""
    d = plan.decomp
    slab = np.searchsorted(d.lines, us, "right") - 1
    batch = d.region.sections(us)
    layer = locate_layer(batch, vs)
    key = {(c.slab, c.layer): k for k, c in enumerate(plan.cells)}
    k = np.array([key.get((int(s), int(j)), -1) if j >= 0 and us_ >= 0 else -1
                  for s, j, us_ in zip(slab, layer, us)], dtype=np.int64)
    lo = np.full(len(us), np.nan)
    hi = np.full(len(us), np.nan)
    for i in np.flatnonzero(layer >= 0):
        iv = batch.intervals(i)[layer[i]]
        lo[i], hi[i] = iv
    return k, lo, hi


def mu_plus_on_curve(plan, w):
    """mu_plus at points of gamma(r) (working coordinates), vectorized.

    For a point of gamma(r) in face D_k the symmetrized image is
    ``u + i v*_k(u)`` with ``v*_k(u) = mes(B(r) ∩ D_k ∩ {Re = u}) / 2``.
    """
    w = np.asarray(w, dtype=complex)
    us, vs = w.real, w.imag
    k, lo, hi = _cell_lookup(plan, us, vs)
    ok = k >= 0
    out = np.zeros(len(w))
    if ok.any():
        m = clipped_measures(plan.region_r.sections(us[ok]), lo[ok], hi[ok])
        out[ok] = mu_clamped(plan.sigma[k[ok]] + us[ok] + 0.5j * m)
    return out


def _split_polyline(a, b, events):
    """Cut segments a->b at every event abscissa strictly inside their u-range."""
    ua, ub = a.real, b.real
    lo, hi = np.minimum(ua, ub), np.maximum(ua, ub)
    i0 = np.searchsorted(events, lo, "right")
    i1 = np.searchsorted(events, hi, "left")
    cnt = np.maximum(i1 - i0, 0)
    ts = [np.zeros(len(a))]
    owner = [np.arange(len(a))]
    if cnt.sum():
        e = np.repeat(np.arange(len(a)), cnt)
        start = np.concatenate([[0], np.cumsum(cnt)[:-1]])
        idx = i0[e] + (np.arange(int(cnt.sum())) - start[e])
        t = (events[idx] - ua[e]) / (ub[e] - ua[e])
        ts.append(t)
        owner.append(e)
    ts, owner = np.concatenate(ts), np.concatenate(owner)
    order = np.lexsort((ts, owner))
    ts, owner = ts[order], owner[order]
    nxt = np.append(ts[1:], 1.0)
    last = np.append(owner[1:] != owner[:-1], True)
    nxt[last] = 1.0
    d = b - a
    return a[owner] + ts * d[owner], a[owner] + nxt * d[owner]


def prop3_value(plan, n_gauss=6):
    """Integral of mu_plus over gamma(r) ∩ {u > 0} (working coordinates).

    gamma(r) is the boundary polyline of B(r).  Its edges are cut at every
    line of the decomposition and every vertex abscissa of B(r); on each
    piece the face is fixed and v*_k is linear, so a short Gauss rule is
    accurate.
    """
    Wr = plan.region_r
    d = plan.decomp
    events = np.unique(np.concatenate([d.lines, Wr.vertex_us(), [0.0]]))
    total = 0.0
    gx, gw = gauss_legendre(n_gauss)
    for ring in Wr.shells + Wr.holes:
        v = ring[:, 0] + 1j * ring[:, 1]
        a, b = v, np.roll(v, -1)
        p, q = _split_polyline(a, b, events)
        keep = 0.5 * (p.real + q.real) > 0
        p, q = p[keep], q[keep]
        L = np.abs(q - p)
        pts = (p[:, None] + gx[None, :] * (q - p)[:, None]).ravel()
        vals = mu_plus_on_curve(plan, pts).reshape(len(p), n_gauss)
        total += float(np.sum((vals @ gw) * L))
    return total


def gamma_integrals(plan):
    """Metric lengths of sum gamma_k, gamma', gamma* and the translation error eps'."""
    def length(poly):
        if poly is None or len(poly) < 2:
            return 0.0
        return line_integral(poly, mu_clamped, closed=False, singular_points=())

    g = sum(length(x) for x in plan.gamma)
    gp = [length(x) for x in plan.gamma_prime]
    gs = [length(x) for x in plan.gamma_star]
    eps_prime = max((abs(x - y) for x, y in zip(gs, gp)), default=0.0)
    spread = max(plan.n_prime - plan.k_prime, 0)
    return {
        "sum_gamma_k": g,
        "gamma_prime": float(sum(gp)),
        "gamma_star": float(sum(gs)),
        "eps_prime": float(eps_prime),
        "eps_bound": float(2 * eps_prime * spread),
    }


# -- per-map drivers -----------------------------------------------------------------


@dataclass
class SideSetup:
    decomp: object
    plan: TransportPlan


def _both_sides(f, rho, r, delta, tol_rho=1e-5, tol_r=1e-6, sides=("positive", "negative")):
    Br = region_for(f, r, tol_r)
    out = {}
    for side in sides:
        d = build_decomposition(f, rho, delta, side, tol=tol_rho)
        out[side] = SideSetup(d, build_transport(d, Br, r, f))
    return out


@dataclass(frozen=True)
class Prop3Result:
    value: float
    eps_report: float
    chain: dict


def prop3_lower_bound(f, r, rho, delta, side="positive", tol_rho=1e-5, tol_r=1e-6):
    """Integral of mu_plus over gamma(r) ∩ {side}, with eps_report = max(0, 1/2 - value)."""
    s = _both_sides(f, rho, r, delta, tol_rho, tol_r, sides=(side,))[side]
    value = prop3_value(s.plan)
    return Prop3Result(value, max(0.0, 0.5 - value), gamma_integrals(s.plan))


@dataclass(frozen=True)
class Eq5Result:
    value: float
    t_excess: float
    positive: float
    negative: float


def eq5_excess(f, r, rho, delta, tol_rho=1e-5, tol_r=1e-6):
    """Full-curve integral of mu' (mu_plus right of the axis, mu_minus left) minus 1."""
    s = _both_sides(f, rho, r, delta, tol_rho, tol_r)
    vp = prop3_value(s["positive"].plan)
    vn = prop3_value(s["negative"].plan)
    return Eq5Result(vp + vn, vp + vn - 1.0, vp, vn)


# -- area bound ---------------------------------------------------------------------------


def r0_prime(f, r0, n=4096):
    """Largest r' with B(r', p) ⊂ B(r0, f): the min of |tanh w| over in-strip points of gamma(r0, f)."""
    phis = np.linspace(0, 2 * np.pi, n, endpoint=False)

    def g(phi):
        w = f(r0 * np.exp(1j * np.asarray(phi)))
        return np.where(np.abs(w.imag) < QUARTER_PI, np.abs(np.tanh(w)), np.inf)

    vals = g(phis)
    i = int(np.argmin(vals))
    if not np.isfinite(vals[i]):
        raise NoContainmentRadius(f"gamma({r0}) lies outside the strip")
    h = 2 * np.pi / n
    res = minimize_scalar(lambda t: float(g(t)), bounds=(phis[i] - h, phis[i] + h),
                          method="bounded", options={"xatol": 1e-14})
    rp = min(float(vals[i]), float(res.fun))
    if not rp > 0:
        raise NoContainmentRadius("no positive containment radius")
    return rp


def contains_strip_disk(f, r0, rprime, tol=1e-6):
    """Polyline test of B(r', p) ⊂ B(r0, f) (independent check of :func:`r0_prime`)."""
    inner = trace_level_curve(strip_map(), rprime, tol, check_simple=False).vertices
    outer = region_for(f, r0, tol)
    return bool(np.all(outer.contains(inner)))


def prop4_value(decomp, region_r0, sigma=None, n_gauss=8):
    """Integral of mu_plus^2 over B(rho) \\ B(r0) on one side, by sections.

    On the section of face D_k at u the values of mu_plus^2 outside B(r0)
    are those of mu^2 on ``sigma_k + u + i s`` for ``|s|`` between
    ``h0(u) = mes(B(r0) ∩ D_k)/2`` and ``H(u) = mes(D_k)/2``, each taken
    twice; the s-integral has a closed form.
    """
    W = decomp.region
    W0 = region_r0 if decomp.side > 0 else region_r0.mirrored()
    cells = decomp.ordered
    n = len(cells)
    if sigma is None:
        sigma = np.zeros(n)
        if n:
            sigma[0] = -cells[0].a
            for k in range(1, n):
                sigma[k] = cells[k - 1].b + sigma[k - 1] - cells[k].a
    ev_all = np.unique(np.concatenate([W.vertex_us(), W0.vertex_us()]))
    gx, gw = gauss_legendre(n_gauss)
    us, ws, ks = [], [], []
    for k, c in enumerate(cells):
        ev = ev_all[(ev_all > c.a) & (ev_all < c.b)]
        knots = np.concatenate([[c.a], ev, [c.b]])
        lo, hi = knots[:-1], knots[1:]
        u = (lo[:, None] + gx[None, :] * (hi - lo)[:, None]).ravel()
        wt = (gw[None, :] * (hi - lo)[:, None]).ravel()
        us.append(u)
        ws.append(wt)
        ks.append(np.full(len(u), k))
    if not us:
        return 0.0
    us, ws, ks = np.concatenate(us), np.concatenate(ws), np.concatenate(ks)
    face = decomp.face_intervals([cells[k] for k in ks], us)
    H = 0.5 * (face[:, 1] - face[:, 0])
    h0 = 0.5 * clipped_measures(W0.sections(us), face[:, 0], face[:, 1])
    inner = 2 * mu_sq_strip_integral(sigma[ks] + us, h0, H)
    return float(np.sum(inner * ws))


@dataclass(frozen=True)
class Prop4Result:
    value: float
    bound: float
    bound_statement: float
    r0: float
    r0_prime: float
    holds: bool


def prop4_upper_bound(f, r0, rho, delta=0.05, side="positive", abs_tol=1e-4, tol=1e-5):
    """Compare the mu_plus^2 area over B(rho) \\ B(r0) with -(1/4 pi) ln r0'.

    ``bound_statement`` carries the variant -(1/4 pi) ln r0 for reference.
    """
    rp = r0_prime(f, r0)
    d = build_decomposition(f, rho, delta, side, tol=tol)
    value = prop4_value(d, region_for(f, r0, tol * 0.1))
    bound = -math.log(rp) / (4 * math.pi)
    return Prop4Result(value, bound, -math.log(r0) / (4 * math.pi), r0, rp, value <= bound + abs_tol)


# -- Minkowski and Schwarz ---------------------------------------------------------------


@dataclass(frozen=True)
class MinkowskiResult:
    holds: bool
    min_margin: float
    max_equality_defect: float


def minkowski_check(layers, grid, atol=1e-12):
    """Pointwise sum_c sqrt(1 + v_c'^2) >= 2 sqrt(1 + v*'^2) for piecewise-linear layers.

    ``layers`` is a (2C, len(grid)) array of values at ``grid`` ordered from
    the top (``v_1 >= v_2 >= ...``); slopes are taken on each grid cell.
    """
    L = np.asarray(layers, dtype=float)
    if L.shape[0] % 2:
        raise OddLayerCount(f"{L.shape[0]} layers; need an even count")
    if np.any(np.diff(L, axis=0) > atol):
        raise ValueError("layers are not interlaced (v_{c+1} <= v_c)")
    du = np.diff(np.asarray(grid, dtype=float))
    slopes = np.diff(L, axis=1) / du
    signs = np.where(np.arange(L.shape[0]) % 2 == 0, 1.0, -1.0)
    vstar_slope = 0.5 * (signs @ slopes)
    lhs = np.sqrt(1 + slopes**2).sum(axis=0)
    rhs = 2 * np.sqrt(1 + vstar_slope**2)
    margin = lhs - rhs
    return MinkowskiResult(bool(np.all(margin >= -atol)), float(margin.min()),
                           float(np.max(np.abs(margin))))


@dataclass(frozen=True)
class SchwarzResult:
    r_prime: float
    sup_ratio: float
    shift: complex
    match_error: float


def schwarz_rigidity_check(f, r, c=None, match_tol=1e-6, n=4096):
    """Match gamma(r, f) with a vertical translate of some gamma(r', p) and test Schwarz.

    ``c`` (purely imaginary) defaults to minus the midpoint of the curve's
    vertical extent.  Then ``g(z) = h(p^-1(f(z) + c))`` with
    ``h(zeta) = r'^2 (zeta - a) / (r'^2 - conj(a) zeta)``, ``a = p^-1(c)``,
    maps |z| < r into |zeta| < r' and fixes 0; ``sup_ratio`` is the largest
    ``|g(z)|/|z|`` sampled on circles inside |z| <= r.
    """
    phis = np.linspace(0, 2 * np.pi, n, endpoint=False)
    w = f(r * np.exp(1j * phis))
    if c is None:
        c = -0.5j * (w.imag.max() + w.imag.min())
    c = complex(c)
    if abs(c.real) > 0:
        raise ValueError("shift must be purely imaginary")
    wc = w + c
    if np.any(np.abs(wc.imag) >= QUARTER_PI):
        raise NotATranslate(f"gamma({r}) of {f.name} does not fit in the strip")
    from .maps import u_extent

    rp = math.tanh(u_extent(f, r))
    err = float(np.max(np.abs(np.abs(np.tanh(wc)) - rp)))
    if err > match_tol:
        raise NotATranslate(f"gamma({r}) of {f.name} is no translate of a strip level curve "
                            f"(mismatch {err:.2e})")
    a = complex(np.tanh(c))
    R2 = rp * rp

    def h(zeta):
        return R2 * (zeta - a) / (R2 - a.conjugate() * zeta)

    radii = r * np.linspace(0.05, 1.0, 20)
    z = (radii[:, None] * np.exp(1j * phis[None, ::8])).ravel()
    if r >= 1.0:
        z = z[np.abs(z) < 1]
    g = h(np.tanh(f(z) + c))
    return SchwarzResult(rp, float(np.max(np.abs(g) / np.abs(z))), c, err)


# -- pointwise mu_plus (independent of the section bookkeeping) -------------------------------


def _inverse_radius(f, w, z0):
    z = complex(z0)
    for _ in range(60):
        step = (complex(f(z)) - w) / complex(f.deriv(z))
        z -= step
        if abs(z) >= 1:
            z = z / abs(z) * 0.999999
        if abs(step) < 1e-15:
            break
    return abs(z)


def _level_section(f, t, u, sign, n=4096):
    """Crossings of gamma(t) with the working line u (root finding in phi)."""
    phis = np.linspace(0, 2 * np.pi, n + 1)

    def g(phi):
        return sign * f(t * np.exp(1j * phi)).real - u

    vals = g(phis)
    vs = []
    for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
        ph = brentq(lambda x: float(g(x)), phis[i], phis[i + 1], xtol=1e-15)
        vs.append(float(f(t * np.exp(1j * ph)).imag))
    return np.sort(vs)


def mu_plus_pointwise(plan, f, w):
    """mu_plus at an interior point ``w`` (real coordinates) straight from the definition.

    ``w`` lies on gamma(t) with ``t = |f^-1(w)|``; its symmetrized image is
    ``u + i mes(B(t) ∩ D_k ∩ {Re = u})/2`` with the section of B(t) found by
    root finding on the exact curve.
    """
    sgn = plan.side
    u, v = sgn * w.real, w.imag
    k, lo, hi = _cell_lookup(plan, np.array([u]), np.array([v]))
    if k[0] < 0:
        return 0.0
    grid_r = np.linspace(0.02, 0.999, 200)
    grid_p = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    zz = (grid_r[:, None] * np.exp(1j * grid_p[None, :])).ravel()
    zz = zz[np.abs(zz) < f.max_radius]
    z0 = zz[np.argmin(np.abs(f(zz) - w))]
    t = _inverse_radius(f, w, z0)
    vs = _level_section(f, t, u, sgn)
    iv = vs.reshape(-1, 2) if len(vs) % 2 == 0 else np.zeros((0, 2))
    ov = np.maximum(np.minimum(iv[:, 1], hi[0]) - np.maximum(iv[:, 0], lo[0]), 0.0).sum()
    return float(mu_clamped(plan.sigma[k[0]] + u + 0.5j * ov))


def covering_radius(f, target=2 * QUARTER_PI, lo=0.01, hi=0.99, tol=1e-4, curve_tol=1e-5):
    """Smallest rho with a vertical segment of length ``target`` inside B(rho, f), by bisection.

    Below this radius the construction's standing hypothesis (no vertical
    segment longer than pi/2) holds and every transported point stays in the
    closed strip.  Returns ``hi`` when even B(hi) covers no such segment.
    """
    from .geometry import max_vertical_segment

    def covers(r):
        return max_vertical_segment(region_for(f, r, curve_tol)).length >= target

    if not covers(hi):
        return hi
    if covers(lo):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if covers(mid) else (mid, hi)
    return hi


# -- final inequality chain -----------------------------------------------------------------


def curve_lengths(f, radii, rho, delta, tol_rho=1e-5, tol_r=1e-6, windowed=False):
    """mu'-lengths L(r) of gamma(r, f) with the per-side half-length values, one decomposition per side.

    ``windowed`` keeps the pitch ``delta`` only where the largest gamma(r)
    reaches (plus one pitch); faces further out come after every face that
    meets those curves in the r(D) order, so mu_plus on them is unchanged.
    """
    lines = None
    if windowed:
        rmax = float(np.max(radii))
        reach = (u_extent(f, rmax, sign=-1.0), u_extent(f, rmax))
        lines = build_line_system(f, rho, delta, fine_window=(-reach[0] - delta, reach[1] + delta))
    decomps = {s: build_decomposition(f, rho, delta, s, tol=tol_rho, lines=lines)
               for s in ("positive", "negative")}
    rows = []
    for r in radii:
        Br = region_for(f, r, tol_r)
        vp = prop3_value(build_transport(decomps["positive"], Br, r))
        vn = prop3_value(build_transport(decomps["negative"], Br, r))
        rows.append((float(r), vp, vn, vp + vn))
    return rows


@dataclass(frozen=True)
class ChainRow:
    r0: float
    r0_prime: float
    lhs: float  # -(1/2pi) ln r0'
    rhs: float  # (1-4eps)/(2pi) ln(rho/r0) + (t+2eps)/pi ln(r2/r1)
    margin: float  # lhs - rhs; the argument needs this to turn negative


@dataclass(frozen=True)
class ChainTable:
    rho: float
    r1: float
    r2: float
    t: float
    eps: float
    rows: tuple

    @property
    def margins(self):
        return np.array([row.margin for row in self.rows])

    @property
    def decreasing(self):
        return bool(np.all(np.diff(self.margins) < 0))

    @property
    def contradicts(self):
        """True when the inequality the argument derives is violated at the smallest r0."""
        return bool(self.rows and self.rows[-1].margin < 0)


def contradiction_chain(f, rho, r1, r2, r0_list=(0.2, 0.1, 0.05), delta=0.05, n_t=3):
    """Tabulate both sides of the final inequality for decreasing r0.

    ``t`` is the smallest excess ``L(r) - 1`` over ``n_t`` radii in [r1, r2];
    ``eps`` the largest one-sided shortfall ``1/2 - value`` over the same radii.
    """
    rows = curve_lengths(f, np.linspace(r1, r2, n_t), rho, delta, windowed=True)
    t = min(L - 1.0 for *_, L in rows)
    eps = max(max(0.0, 0.5 - vp, 0.5 - vn) for _, vp, vn, _ in rows)
    out = []
    for r0 in sorted(r0_list, reverse=True):
        rp = r0_prime(f, r0)
        lhs = -math.log(rp) / (2 * math.pi)
        rhs = (1 - 4 * eps) / (2 * math.pi) * math.log(rho / r0) + (t + 2 * eps) / math.pi * math.log(r2 / r1)
        out.append(ChainRow(float(r0), rp, lhs, rhs, lhs - rhs))
    return ChainTable(float(rho), float(r1), float(r2), float(t), float(eps), tuple(out))


@dataclass(frozen=True)
class ModulusComparison:
    r0: float
    rho: float
    radii: np.ndarray
    lengths: np.ndarray
    length_bound: float  # integral of L(r)^2 / (2 pi r) dr
    area: float  # integral of mu'^2 over B(rho) \ B(r0), both sides
    area_bound: float  # -(1/2pi) ln r0'

    @property
    def consistent(self):
        """Cauchy-Schwarz lower bound <= area <= area upper bound (small quadrature slack)."""
        return bool(self.length_bound <= self.area * (1 + 1e-3) + 1e-4 and self.area <= self.area_bound + 1e-4)


def modulus_comparison(f, r0, rho, delta=0.05, n_r=6):
    """Compare the pulled-back metric's area with its circle lengths on r0 < |z| < rho.

    Since the area of mu'^2 over B(rho) \\ B(r0) is the area of mu*^2 over the
    annulus and L(r) is the mu*-length of |z| = r, Cauchy-Schwarz gives
    ``area >= int L(r)^2 / (2 pi r) dr``; the area bound on both sides gives
    ``area <= -(1/2 pi) ln r0'``.  Lengths are taken at Gauss nodes in ln r.
    """
    gx, gw = gauss_legendre(n_r)
    s0, s1 = math.log(r0), math.log(rho)
    radii = np.exp(s0 + gx * (s1 - s0))
    rows = curve_lengths(f, radii, rho, delta)
    L = np.array([row[3] for row in rows])
    # dr / r = ds
    length_bound = float(np.sum(gw * (s1 - s0) * L**2) / (2 * math.pi))
    Br0 = region_for(f, r0, 1e-6)
    area = 0.0
    for side in ("positive", "negative"):
        area += prop4_value(build_decomposition(f, rho, delta, side), Br0)
    rp = r0_prime(f, r0)
    return ModulusComparison(float(r0), float(rho), radii, L, length_bound, float(area),
                             -math.log(rp) / (2 * math.pi))
