"""
Schlicht-function catalog and complex-analytic evaluation.

Points are plain Python/NumPy complex numbers: ``w = u + iv`` in the image
plane and ``z = x + iy`` in the unit disk.  Every evaluation routine is
vectorized over ndarray input.

Catalog
-------
strip           p(z) = 1/2 ln((1+z)/(1-z)) = artanh z   (the extremal map)
scaled_strip    a0 + (l/pi) ln((1+eps z)/(1-eps z)),  |eps| = 1
koebe           z/(1-z)^2
half_plane      z/(1-z)
two_slit        z/(1-z^2)
poly_convex     z - z^2/2
series          user power series sum c_k z^k
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, EvalError, RefinementLimit, SelfIntersection

QUARTER_PI = math.pi / 4
MAX_VERTICES = 2**20

KINDS = ("strip", "scaled_strip", "koebe", "half_plane", "two_slit", "poly_convex", "series")


@dataclass(frozen=True)
class AnalyticMap:
    """A regular function on the unit disk, given in closed form or as a series.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    l, eps, a0 : float, complex, complex
        Parameters of the ``scaled_strip`` family; ignored otherwise.
    coeffs : tuple of complex
        Taylor coefficients ``c_0, c_1, ...`` for ``series``.
    schlicht_certified : bool
        Whether the map is known to be univalent.  Catalog entries are;
        series are not unless the caller asserts it.
    margin : float
        Series are only evaluated on ``|z| <= 1 - margin``.
    """

    kind: str
    l: float = math.pi / 2
    eps: complex = 1.0
    a0: complex = 0.0
    coeffs: tuple = ()
    schlicht_certified: bool = True
    margin: float = 1e-3
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "scaled_strip":
            if not self.l > 0:
                raise ValueError("l must be positive")
            if abs(abs(complex(self.eps)) - 1.0) > 1e-12:
                raise ValueError("eps must have unit modulus")
        if self.kind == "series" and len(self.coeffs) < 2:
            raise ValueError("series needs at least two coefficients")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    # -- evaluation ---------------------------------------------------------

    def _check(self, z):
        z = np.asarray(z, dtype=complex)
        az = np.abs(z)
        if np.any(az >= 1.0) or not np.all(np.isfinite(az)):
            raise DomainError("evaluation requires |z| < 1")
        if self.kind == "series" and np.any(az > 1.0 - self.margin + 1e-15):
            raise DomainError(f"series evaluated only on |z| <= 1 - {self.margin}")
        return z

    def __call__(self, z):
        return _finite(self._value(self._check(z)))

    def deriv(self, z):
        return _finite(self._deriv(self._check(z), 1))

    def deriv2(self, z):
        return _finite(self._deriv(self._check(z), 2))

    def _value(self, z):
        k = self.kind
        with np.errstate(all="ignore"):
            if k == "strip":
                return np.arctanh(z)
            if k == "scaled_strip":
                return complex(self.a0) + (2 * self.l / math.pi) * np.arctanh(complex(self.eps) * z)
            if k == "koebe":
                return z / (1 - z) ** 2
            if k == "half_plane":
                return z / (1 - z)
            if k == "two_slit":
                return z / (1 - z * z)
            if k == "poly_convex":
                return z - z * z / 2
            return np.polynomial.polynomial.polyval(z, np.asarray(self.coeffs, dtype=complex))

    def _deriv(self, z, order):
        k = self.kind
        with np.errstate(all="ignore"):
            if k == "strip":
                return 1 / (1 - z * z) if order == 1 else 2 * z / (1 - z * z) ** 2
            if k == "scaled_strip":
                e = complex(self.eps)
                s = 2 * self.l / math.pi
                q = 1 - (e * z) ** 2
                return s * e / q if order == 1 else s * 2 * e**3 * z / q**2
            if k == "koebe":
                return (1 + z) / (1 - z) ** 3 if order == 1 else (4 + 2 * z) / (1 - z) ** 4
            if k == "half_plane":
                return 1 / (1 - z) ** 2 if order == 1 else 2 / (1 - z) ** 3
            if k == "two_slit":
                q = 1 - z * z
                return (1 + z * z) / q**2 if order == 1 else 2 * z * (3 + z * z) / q**3
            if k == "poly_convex":
                return 1 - z if order == 1 else -np.ones_like(z)
            c = np.asarray(self.coeffs, dtype=complex)
            d = np.polynomial.polynomial.polyder(c, order)
            return np.polynomial.polynomial.polyval(z, d)

    # -- classification -----------------------------------------------------

    def is_class_s(self, tol=1e-12):
        """True when f(0) = 0 and f'(0) = 1 to within ``tol``."""
        return abs(complex(self(0.0))) <= tol and abs(complex(self.deriv(0.0)) - 1) <= tol

    @property
    def max_radius(self):
        return 1.0 - self.margin if self.kind == "series" else 1.0


def _finite(w):
    if not np.all(np.isfinite(w)):
        raise EvalError("non-finite value (overflow or pole)")
    return w


# -- catalog ------------------------------------------------------------------


def strip_map():
    return AnalyticMap("strip", name="strip")


def scaled_strip(l, eps=1.0, a0=0.0):
    return AnalyticMap("scaled_strip", l=float(l), eps=complex(eps), a0=complex(a0),
                       name=f"scaled_strip(l={l:g},eps={complex(eps):.4g})")


def koebe():
    return AnalyticMap("koebe", name="koebe")


def half_plane():
    return AnalyticMap("half_plane", name="half_plane")


def two_slit():
    return AnalyticMap("two_slit", name="two_slit")


def poly_convex():
    return AnalyticMap("poly_convex", name="poly_convex")


def power_series(coeffs, certified=False, margin=1e-3, name="series"):
    return AnalyticMap("series", coeffs=tuple(complex(c) for c in coeffs),
                       schlicht_certified=certified, margin=margin, name=name)


CATALOG = {
    "strip": strip_map,
    "koebe": koebe,
    "half_plane": half_plane,
    "two_slit": two_slit,
    "poly_convex": poly_convex,
}
NON_EXTREMAL = ("koebe", "half_plane", "two_slit", "poly_convex")


def catalog(name):
    try:
        return CATALOG[name]()
    except KeyError:
        raise ValueError(f"unknown catalog map {name!r}; choose from {sorted(CATALOG)}") from None


def load_power_series(path, override=False, certified=False, margin=1e-3):
    """Read a series from lines ``k re im``.

    Blank lines and ``#`` comments are skipped.  Unless ``override`` is set the
    first two coefficients are forced to 0 and 1 (class-S normalization).
    """
    terms = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'k re im'")
        k = int(parts[0])
        if k < 0:
            raise ValueError(f"{path}:{lineno}: negative index")
        terms[k] = complex(float(parts[1]), float(parts[2]))
    n = max(terms, default=1) + 1
    coeffs = [terms.get(k, 0j) for k in range(max(n, 2))]
    if not override:
        coeffs[0], coeffs[1] = 0j, 1 + 0j
    return power_series(coeffs, certified=certified, margin=margin, name=Path(path).stem)


# -- spec-level operations ------------------------------------------------------


def evaluate(f, z):
    return f(z)


def deriv(f, z):
    return f.deriv(z)


def strip_inverse(w):
    """Inverse of the strip map, ``tanh w``, on the closed strip |Im w| <= pi/4."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w.imag) > QUARTER_PI + 1e-12):
        raise DomainError("strip_inverse needs |Im w| <= pi/4")
    out = np.tanh(w)
    return out if out.ndim else complex(out)


def coefficient_a1(f, n=4096):
    """First Taylor coefficient by the trapezoid rule on |z| = 1/2.

    (1/2 pi i) \\oint f(z) z^-2 dz reduces to the mean of f(z_j)/z_j over
    equispaced nodes, which converges geometrically for maps regular on U.
    """
    z = 0.5 * np.exp(2j * np.pi * np.arange(n) / n)
    return complex(np.mean(f(z) / z))


@dataclass(frozen=True)
class ClosedPolyline:
    """Polygonal approximation of a level curve gamma(r, f).

    ``vertices[i] = f(r exp(i phis[i]))``; the closing edge back to vertex 0 is
    implicit.
    """

    vertices: np.ndarray
    phis: np.ndarray
    radius: float
    refinement_tol: float

    def __len__(self):
        return len(self.vertices)

    @property
    def closed(self):
        return True

    def xy(self):
        return np.column_stack([self.vertices.real, self.vertices.imag])

    def signed_area(self):
        x, y = self.vertices.real, self.vertices.imag
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _chord_deviation(a, b, m):
    d = b - a
    L2 = (d * d.conjugate()).real
    t = np.where(L2 > 0, ((m - a) * d.conjugate()).real / np.where(L2 > 0, L2, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(m - (a + t * d))


def trace_level_curve(f, r, tol, extra_phis=(), n_initial=256, max_vertices=MAX_VERTICES,
                      check_simple=True):
    """Adaptively sample gamma(r, f) until every chord-midpoint deviation is <= tol.

    ``extra_phis`` are parameter values that must appear as vertices (used to
    pin vertical-tangent points).  The first vertex is at phi = 0.
    """
    if not 0 < r < f.max_radius:
        raise DomainError(f"radius {r} outside (0, {f.max_radius})")
    if tol <= 0:
        raise ValueError("tol must be positive")
    phis = np.linspace(0.0, 2 * np.pi, n_initial, endpoint=False)
    extra = np.mod(np.asarray(extra_phis, dtype=float), 2 * np.pi)
    phis = np.unique(np.concatenate([phis, extra]))
    w = f(r * np.exp(1j * phis))
    while True:
        nxt = np.append(phis[1:], 2 * np.pi)
        wn = np.roll(w, -1)
        pm = 0.5 * (phis + nxt)
        wm = f(r * np.exp(1j * pm))
        bad = _chord_deviation(w, wn, wm) > tol
        if not bad.any():
            break
        if len(phis) + int(bad.sum()) > max_vertices:
            raise RefinementLimit(f"level curve r={r} needs more than {max_vertices} vertices")
        idx = np.flatnonzero(bad) + 1
        phis = np.insert(phis, idx, pm[bad])
        w = np.insert(w, idx, wm[bad])
    curve = ClosedPolyline(w, phis, float(r), float(tol))
    if check_simple and f.schlicht_certified and not is_simple(curve.vertices):
        raise SelfIntersection(f"gamma({r}) of {f.name} is not simple at tol={tol}")
    return curve


def is_simple(vertices):
    from shapely.geometry import LinearRing

    xy = np.column_stack([np.real(vertices), np.imag(vertices)])
    return bool(LinearRing(xy).is_simple)


def convexity_functional(f, z):
    """Re(1 + z f''(z)/f'(z)); nonnegative on |z| = r iff gamma(r, f) is convex."""
    return (1 + z * f.deriv2(z) / f.deriv(z)).real


def convexity_radius(f, tol=1e-9, n_phi=2048, n_r=200, r_tol=1e-7):
    """Largest r* with gamma(r, f) convex for every r <= r*.

    The convexity functional is scanned on a polar grid up to
    ``f.max_radius - 1e-3``; the first radius where its minimum drops below
    ``-tol`` is refined by bisection.
    """
    r_cap = f.max_radius - 1e-3
    phis = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    circle = np.exp(1j * phis)

    def ok(r):
        return convexity_functional(f, r * circle).min() > -tol

    radii = np.linspace(r_cap / n_r, r_cap, n_r)
    prev = 0.0
    for r in radii:
        if not ok(r):
            lo, hi = prev, r
            while hi - lo > r_tol:
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if ok(mid) else (lo, mid)
            return lo
        prev = r
    return r_cap


def vertical_tangent_phis(f, r, n=4096):
    """Parameters phi where d/dphi Re f(r e^{i phi}) changes sign.

    d/dphi Re f = -Im(z f'(z)); each sign change on the grid is polished with
    Brent's method.
    """
    def g(phi):
        z = r * np.exp(1j * phi)
        return -(z * f.deriv(z)).imag

    phis = np.linspace(0, 2 * np.pi, n + 1)
    vals = g(phis)
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
        a, b = phis[i], phis[i + 1]
        if vals[i] == 0:
            roots.append(a)
        elif vals[i + 1] != 0:
            roots.append(brentq(lambda t: float(g(t)), a, b, xtol=1e-15))
    roots = np.mod(np.asarray(roots), 2 * np.pi)
    return np.unique(np.round(roots, 14))


def u_extent(f, r, n=2048, sign=1.0):
    """max over |z| = r of sign * Re f(z), refined around the best grid node."""
    phis = np.linspace(0, 2 * np.pi, n, endpoint=False)
    vals = sign * f(r * np.exp(1j * phis)).real
    i = int(np.argmax(vals))
    h = 2 * np.pi / n
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda t: -sign * float(f(r * np.exp(1j * t)).real),
                          bounds=(phis[i] - h, phis[i] + h), method="bounded",
                          options={"xatol": 1e-13})
    return max(float(vals[i]), -float(res.fun))


def u_extent_many(f, radii, sign=1.0, n=256, iters=60, chunk=1024):
    """Vectorized :func:`u_extent` over an array of radii.

    Each radius gets a coarse phi-grid argmax followed by a golden-section
    search in the two neighbouring grid cells.
    """
    radii = np.asarray(radii, dtype=float)
    out = np.empty(len(radii))
    phis = np.linspace(0, 2 * np.pi, n, endpoint=False)
    h = 2 * np.pi / n
    gr = (math.sqrt(5) - 1) / 2
    for s in range(0, len(radii), chunk):
        r = radii[s:s + chunk, None]
        vals = sign * f(r * np.exp(1j * phis)[None, :]).real
        i = np.argmax(vals, axis=1)
        best = vals[np.arange(len(r)), i]
        lo, hi = phis[i] - h, phis[i] + h
        r1 = r[:, 0]

        def g(t):
            return sign * f(r1 * np.exp(1j * t)).real

        c, d = hi - gr * (hi - lo), lo + gr * (hi - lo)
        gc, gd = g(c), g(d)
        for _ in range(iters):
            left = gc > gd
            hi = np.where(left, d, hi)
            lo = np.where(left, lo, c)
            c_new, d_new = hi - gr * (hi - lo), lo + gr * (hi - lo)
            # reuse the surviving interior point
            gc, gd = np.where(left, g(c_new), gd), np.where(left, gc, g(d_new))
            c, d = np.where(left, c_new, d), np.where(left, c, d_new)
        out[s:s + chunk] = np.maximum(best, np.maximum(gc, gd))
    return out
