"""Acceptance criteria 1-11; each test prints one PASS/FAIL line."""

import cmath
import math

import numpy as np
import pytest

import oracles
from conftest import cached_decomposition, cached_region, comb_region, random_polygon
from vertcover.errors import NotATranslate
from vertcover.geometry import max_vertical_segment, monotone_reachable_grid, steiner_symmetrize
from vertcover.maps import CATALOG, NON_EXTREMAL, catalog, coefficient_a1, scaled_strip, strip_map
from vertcover.metric import (LevelCurve, area_integral, eq5_excess, line_integral, mu, mu_ext,
                              prop3_lower_bound, prop4_upper_bound, r0_prime, schwarz_rigidity_check)
from vertcover.runs import minkowski_suite
from vertcover.slabs import (build_decomposition, check_prop2, decompose, monotone_curve, region_for,
                             reachable_u_intervals)

HALF_PI = math.pi / 2
SIDES = ("positive", "negative")


def _segment_reachable(R, seg):
    return monotone_curve(R, seg.u0, seg.v_lo, seg.v_hi) is not None


def test_c01_sharpness(criterion):
    p = strip_map()
    segs = {rho: max_vertical_segment(region_for(p, rho, 1e-6)) for rho in (0.9, 0.99, 0.999)}
    lengths = [segs[r].length for r in sorted(segs)]
    top = segs[0.999]
    ok = (HALF_PI - 0.01 <= top.length <= HALF_PI and lengths[0] < lengths[1] < lengths[2]
          and abs(top.u0) <= 0.01 and _segment_reachable(region_for(p, 0.999, 1e-6), top))
    criterion(1, ok, f"l(B(rho,p)) = {', '.join(f'{x:.6f}' for x in lengths)}; u0 = {top.u0:.2e}")
    assert ok


def test_c02_strict_covering(criterion):
    parts, ok = [], True
    for name in NON_EXTREMAL:
        R = region_for(catalog(name), 0.99, 1e-5)
        seg = max_vertical_segment(R)
        good = seg.length >= HALF_PI + 0.05 and _segment_reachable(R, seg)
        ok &= good
        parts.append(f"{name} {seg.length:.4f}")
    criterion(2, ok, "l at rho=0.99: " + ", ".join(parts))
    assert ok


def test_c03_scaled_strip_family(criterion):
    parts, ok = [], True
    for eps in (1, 1j, cmath.exp(1j * math.pi / 4)):
        f = scaled_strip(2.0, eps)
        length = max_vertical_segment(region_for(f, 0.999, 1e-6)).length
        a1 = abs(coefficient_a1(f))
        good = (abs(length - 2) <= 0.01 and abs(a1 - oracles.FOUR_OVER_PI) <= 1e-9
                and abs(a1 - 2 * length / math.pi) <= 1e-9 + 2 * 0.01 / math.pi)
        ok &= good
        parts.append(f"eps={complex(eps):.3g}: l={length:.6f} |a1|={a1:.10f}")
    criterion(3, ok, "; ".join(parts))
    assert ok


def test_c04_pullback_identities(criterion):
    p = strip_map()
    full = [line_integral(LevelCurve(p, r), mu) for r in (0.3, 0.6, 0.9)]
    half = line_integral(LevelCurve(p, 0.6, -math.pi / 2, math.pi / 2), mu)
    area = area_integral(cached_region("strip", 0.9), cached_region("strip", 0.1), lambda w: mu_ext(w) ** 2)
    ok = (all(abs(x - 1) <= 1e-6 for x in full) and abs(half - 0.5) <= 1e-6
          and abs(area - math.log(9) / (2 * math.pi)) <= 1e-3)
    criterion(4, ok, f"lengths {max(abs(x - 1) for x in full):.1e} off 1, half {half:.9f}, "
                     f"area {area:.6f} vs {math.log(9) / (2 * math.pi):.6f}")
    assert ok


def test_c05_continuum_balance(criterion):
    maps = {name: catalog(name) for name in (*NON_EXTREMAL, "strip")}
    maps["scaled_strip(l=2,eps=i)"] = scaled_strip(2.0, 1j)
    worst, n = math.inf, 0
    for name, f in maps.items():
        regions = {r: region_for(f, r, 1e-6) for r in (0.3, 0.5, 0.7)}
        for delta in (0.05, 0.02):
            for side in SIDES:
                d = build_decomposition(f, 0.9, delta, side)
                for Br in regions.values():
                    res = check_prop2(d, Br)
                    n += len(res)
                    worst = min(worst, min(x.slack for x in res))
    ok = worst >= -1e-9
    criterion(5, ok, f"{len(maps)} maps, {n} (k, r, delta, side) cases, min slack {worst:.2e}")
    assert ok


def _half_length(f, delta):
    res = [prop3_lower_bound(f, 0.5, 0.9, delta, side) for side in SIDES]
    return min(x.value for x in res), max(x.eps_report for x in res)


def test_c06_half_length(criterion):
    deltas = (0.1, 0.05, 0.025)
    parts, ok = [], True
    for name in ("koebe", "half_plane"):
        vals = [_half_length(catalog(name), d) for d in deltas]
        eps = [e for _, e in vals]
        good = all(b <= a + 1e-4 for a, b in zip(eps, eps[1:])) and vals[-1][0] >= 0.45
        ok &= good
        parts.append(f"{name} value {vals[-1][0]:.5f} eps {', '.join(f'{e:.1e}' for e in eps)}")
    pv = [_half_length(strip_map(), d)[0] for d in deltas]
    ok &= all(abs(v - 0.5) <= 1e-4 for v in pv)
    parts.append(f"p max |value - 1/2| {max(abs(v - 0.5) for v in pv):.1e}")
    criterion(6, ok, "; ".join(parts))
    assert ok


def test_c07_area_bound(criterion):
    worst, parts, ok = math.inf, [], True
    for name in CATALOG:
        f = catalog(name)
        for side in SIDES:
            res = prop4_upper_bound(f, 0.1, 0.95, side=side)
            ok &= res.holds
            worst = min(worst, res.bound - res.value)
        ratios = [r0_prime(f, r0) / r0 for r0 in (0.2, 0.1, 0.05)]
        ok &= all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:])) and ratios[-1] <= 1 + 1e-12
        parts.append(f"{name} " + "/".join(f"{x:.3f}" for x in ratios))
    criterion(7, ok, f"min bound - value {worst:.4f}; r0'/r0: " + ", ".join(parts))
    assert ok


def test_c08_length_excess(criterion):
    radii = (0.5, 0.55, 0.6)
    tp = [eq5_excess(strip_map(), r, 0.9, 0.05).t_excess for r in radii]
    ok = all(abs(t) <= 1e-4 for t in tp)
    parts = [f"p max |t| {max(abs(t) for t in tp):.1e}"]
    for name in ("koebe", "half_plane"):
        f = catalog(name)
        coarse = [eq5_excess(f, r, 0.9, 0.05).t_excess for r in radii]
        fine = [eq5_excess(f, r, 0.9, 0.025).t_excess for r in radii]
        good = all(t > 0.01 for t in coarse + fine) and all(
            abs(b - a) <= 0.2 * abs(a) for a, b in zip(coarse, fine))
        ok &= good
        parts.append(f"{name} t {min(coarse + fine):.4f}..{max(coarse + fine):.4f}")
    criterion(8, ok, "; ".join(parts))
    assert ok


def test_c09_minkowski(criterion):
    checks = minkowski_suite(1000, 20240601)
    ok = all(c.passed for c in checks)
    criterion(9, ok, ", ".join(f"{c.name} margin {c.margin:.1e}" for c in checks))
    assert ok


def test_c10_schwarz(criterion):
    parts, ok = [], True
    for r in (0.5, 0.9):
        res = schwarz_rigidity_check(strip_map(), r, c=0j)
        good = abs(res.r_prime - r) <= 1e-6 and abs(res.sup_ratio - 1) <= 1e-8
        ok &= good
        parts.append(f"r={r}: r'={res.r_prime:.9f} sup={res.sup_ratio:.12f}")
    try:
        schwarz_rigidity_check(catalog("koebe"), 0.5)
        ok = False
        parts.append("koebe accepted")
    except NotATranslate:
        parts.append("koebe NotATranslate")
    criterion(10, ok, "; ".join(parts))
    assert ok


def _merge(iv, gap):
    out = []
    for lo, hi in sorted(iv):
        if out and lo <= out[-1][1] + gap:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return out


def _reach_agrees(R, decomps, delta):
    step = delta / 4
    slab = _merge([iv for d in decomps for iv in reachable_u_intervals(d)], step)
    grid = _merge(monotone_reachable_grid(R, step).intervals, step)
    return len(slab) == len(grid) and all(
        abs(a[0] - b[0]) <= 2 * step and abs(a[1] - b[1]) <= 2 * step for a, b in zip(slab, grid))


def _sym_ok(R):
    S = steiner_symmetrize(R)
    if abs(S.area() - R.area()) > 1e-6 * R.area():
        return False
    x0, _, x1, _ = R.bounds
    us = np.concatenate([np.linspace(x0, x1, 41)[1:-1], R.vertex_us()])
    return all(np.max(np.abs(R.sections(us, s).measures() - S.sections(us, s).measures())) <= 1e-9
               for s in ("left", "right"))


def test_c11_oracles(criterion):
    bad = []
    for name in CATALOG:
        decomps = [cached_decomposition(name, 0.9, 0.1, side) for side in SIDES]
        if not _reach_agrees(cached_region(name, 0.9, 1e-5), decomps, 0.1):
            bad.append(name)
    comb = comb_region()
    lines = np.arange(0, 1.0001, 0.05)
    if not _reach_agrees(comb, [decompose(comb, lines, "positive"), decompose(comb, -lines, "negative")], 0.05):
        bad.append("comb")
    rng = np.random.default_rng(2024)
    sym_fail = sum(not _sym_ok(random_polygon(rng)) for _ in range(50))
    ok = not bad and sym_fail == 0
    criterion(11, ok, f"reachability mismatches: {bad or 'none'}; symmetrization failures {sym_fail}/50")
    assert ok
