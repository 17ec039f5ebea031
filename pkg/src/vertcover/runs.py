"""Per-function analyze/verify runs producing JSON-ready records.

Every verdict is a :class:`Check` carrying its measured margin and the
tolerance it was judged at.  ``kind`` separates theorem-backed checks (a
failure is a bug or a counterexample) from experiment-grade thresholds.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass

import numpy as np

from . import metric
from .errors import NotATranslate, UncertifiedMap, VertcoverError
from .geometry import max_vertical_segment
from .maps import QUARTER_PI, catalog, coefficient_a1, load_power_series
from .slabs import (build_decomposition, check_prop1, check_prop2, continuum_measures, monotone_curve,
                    region_for)
from .svg import Figure

THEOREM, EXPERIMENT = "theorem", "experiment"


class RunFailure(VertcoverError):
    """A module error, re-raised with the parameter tuple it happened at."""


@contextmanager
def at(**params):
    try:
        yield
    except RunFailure:
        raise
    except (VertcoverError, ArithmeticError, ValueError) as exc:
        tup = ", ".join(f"{k}={v}" for k, v in params.items())
        raise RunFailure(f"{type(exc).__name__} at ({tup}): {exc}") from exc


@dataclass
class Check:
    name: str
    kind: str
    passed: bool
    margin: float  # >= 0 means the check passed with this much room
    tol: float
    params: dict
    detail: str = ""

    def to_dict(self):
        d = asdict(self)
        d["margin"] = clean(d["margin"])
        return d


def clean(x):
    """JSON-safe floats (nan/inf -> None), recursively."""
    if isinstance(x, dict):
        return {k: clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def resolve(name, cfg, theorem_level=True):
    if name == "series":
        f = load_power_series(cfg.series_file, override=cfg.series_override,
                              certified=cfg.series_certified)
    else:
        f = catalog(name)
    if theorem_level and not f.schlicht_certified:
        raise UncertifiedMap(f"{f.name} is not certified schlicht; pass series_certified = true")
    return f


# -- analyze -------------------------------------------------------------------------


def analyze_function(name, cfg):
    """Longest covered vertical segment per rho, reachability of its line, a1 and the figure."""
    t0 = time.perf_counter()
    f = resolve(name, cfg, theorem_level=False)
    rows = []
    best = None
    for rho in cfg.rho_list:
        with at(f=f.name, rho=rho):
            R = region_for(f, rho, cfg.curve_tol)
            seg = max_vertical_segment(R)
            path = monotone_curve(R, seg.u0, seg.v_lo, seg.v_hi)
        row = {"rho": rho, "l": seg.length, "u0": seg.u0, "v_lo": seg.v_lo, "v_hi": seg.v_hi,
               "reachable": path is not None, "path_vertices": 0 if path is None else len(path)}
        rows.append(row)
        if best is None or seg.length > best[1].length:
            best = (R, seg, path, rho)
    with at(f=f.name, op="coefficient_a1"):
        a1 = coefficient_a1(f)
    R, seg, path, rho = best
    fig = Figure()
    fig.region(R)
    fig.segment(complex(seg.u0, seg.v_lo), complex(seg.u0, seg.v_hi))
    if path is not None:
        fig.polyline(np.append(path, complex(seg.u0, 0.5 * (seg.v_lo + seg.v_hi))))
    l = best[1].length
    record = {
        "function": f.name,
        "certified": f.schlicht_certified,
        "rows": rows,
        "l": l,
        "u0": seg.u0,
        "rho_at_l": rho,
        "reachable": path is not None,
        "a1": [a1.real, a1.imag],
        "abs_a1": abs(a1),
        "corollary_slack": abs(a1) - 2 * l / math.pi,
        "exceeds_half_pi": l - 2 * QUARTER_PI,
        "timings": {"total_s": time.perf_counter() - t0},
    }
    return clean(record), fig.render()


# -- verify --------------------------------------------------------------------------


def _prop_checks(f, cfg, checks, golden):
    """Interval property, continuum balance, half-length bound and lift signs over the (delta, r) grid at cfg.rho."""
    eps_by_delta = []
    for delta in cfg.delta_list:
        decomps = {}
        for side in ("positive", "negative"):
            with at(f=f.name, rho=cfg.rho, delta=delta, side=side):
                decomps[side] = build_decomposition(f, cfg.rho, delta, side, tol=cfg.curve_tol)
        for r in cfg.r_list:
            with at(f=f.name, rho=cfg.rho, r=r, delta=delta):
                Br = region_for(f, r, cfg.curve_tol * 0.1)
            p = {"rho": cfg.rho, "r": r, "delta": delta}
            for side, d in decomps.items():
                ps = dict(p, side=side)
                with at(f=f.name, **ps):
                    rep = check_prop1(d, Br)
                    meas = continuum_measures(d, Br)
                    p2 = check_prop2(d, Br, measures=meas)
                    plan = metric.build_transport(d, Br, r)
                checks.append(Check("prop1", THEOREM, rep.ok, -float(len(rep.violations)), 0.0, ps,
                                    f"{rep.checked} line pairs, {len(rep.violations)} violations"))
                slack = min((x.slack for x in p2), default=0.0)
                checks.append(Check("prop2", THEOREM, slack >= -1e-9, slack + 1e-9, 1e-9, ps,
                                    f"{len(p2)} cells"))
                lift = float(np.min(plan.lifts)) if len(plan.lifts) else 0.0
                checks.append(Check("lift_nonnegative", THEOREM, True, lift, cfg.lift_tol, ps,
                                    f"k'={plan.k_prime} n'={plan.n_prime}"))
        # half-length bound at cfg.prop3_r, positive side
        with at(f=f.name, rho=cfg.rho, r=cfg.prop3_r, delta=delta, op="prop3"):
            res = metric.prop3_lower_bound(f, cfg.prop3_r, cfg.rho, delta, tol_rho=cfg.curve_tol)
        eps_by_delta.append(res.eps_report)
        p = {"rho": cfg.rho, "r": cfg.prop3_r, "delta": delta}
        golden.append(dict(p, quantity="prop3_value", value=res.value, eps_report=res.eps_report,
                           **{k: v for k, v in res.chain.items()}))
        if f.kind == "strip":
            checks.append(Check("prop3_extremal", THEOREM, abs(res.value - 0.5) <= 1e-4,
                                1e-4 - abs(res.value - 0.5), 1e-4, p, f"value={res.value:.9f}"))
        else:
            checks.append(Check("prop3_floor", EXPERIMENT, res.value >= cfg.prop3_floor,
                                res.value - cfg.prop3_floor, cfg.prop3_floor, p,
                                f"value={res.value:.6f}"))
        checks.append(Check("gamma_star_quarter", THEOREM, res.chain["gamma_star"] >= 0.25 - 1e-6,
                            res.chain["gamma_star"] - 0.25 + 1e-6, 1e-6, p,
                            f"eps'={res.chain['eps_prime']:.3e}"))
    diffs = np.diff(eps_by_delta)
    worst = float(np.max(diffs)) if len(diffs) else 0.0
    checks.append(Check("prop3_eps_trend", EXPERIMENT, worst <= 1e-4, 1e-4 - worst, 1e-4,
                        {"deltas": list(cfg.delta_list)},
                        "eps_report = " + ", ".join(f"{e:.3e}" for e in eps_by_delta)))


def _prop4_checks(f, cfg, checks, golden):
    for side in ("positive", "negative"):
        p = {"r0": cfg.r0, "rho": cfg.prop4_rho, "delta": cfg.prop4_delta, "side": side}
        with at(f=f.name, **p):
            res = metric.prop4_upper_bound(f, cfg.r0, cfg.prop4_rho, cfg.prop4_delta, side=side,
                                           abs_tol=cfg.prop4_tol, tol=cfg.curve_tol)
        checks.append(Check("prop4", THEOREM, res.holds, res.bound + cfg.prop4_tol - res.value,
                            cfg.prop4_tol, p,
                            f"value={res.value:.6f} bound(r0')={res.bound:.6f} "
                            f"bound(r0)={res.bound_statement:.6f}"))
        golden.append(dict(p, quantity="prop4_value", value=res.value, bound=res.bound,
                           bound_statement=res.bound_statement, r0_prime=res.r0_prime))
    ratios = []
    for r0 in sorted(cfg.r0_list, reverse=True):
        with at(f=f.name, r0=r0, op="r0_prime"):
            ratios.append(metric.r0_prime(f, r0) / r0)
    golden.append({"quantity": "r0_ratio", "r0": sorted(cfg.r0_list, reverse=True), "value": ratios})
    step = float(np.min(np.diff(ratios))) if len(ratios) > 1 else 0.0
    ok = step >= -1e-12 and ratios[-1] <= 1 + 1e-9
    checks.append(Check("r0_ratio_to_one", EXPERIMENT, ok, step, 1e-12,
                        {"r0_list": sorted(cfg.r0_list, reverse=True)},
                        "r0'/r0 = " + ", ".join(f"{x:.6f}" for x in ratios)))


def _eq5_checks(f, cfg, checks, golden):
    r1, r2 = cfg.eq5_interval
    radii = np.linspace(r1, r2, cfg.eq5_samples)
    d0 = max(cfg.delta_list)
    tmins = []
    for delta in (d0, d0 / 2):
        ts = []
        for r in radii:
            p = {"rho": cfg.eq5_rho, "r": float(r), "delta": delta}
            with at(f=f.name, **p):
                res = metric.eq5_excess(f, float(r), cfg.eq5_rho, delta, tol_rho=cfg.curve_tol)
            ts.append(res.t_excess)
            golden.append(dict(p, quantity="eq5", value=res.value, t_excess=res.t_excess,
                               positive=res.positive, negative=res.negative))
        tmins.append(min(ts))
    p = {"rho": cfg.eq5_rho, "r1": r1, "r2": r2, "delta": [d0, d0 / 2]}
    if f.kind == "strip":
        worst = max(abs(t) for t in tmins)
        checks.append(Check("eq5_extremal", THEOREM, worst <= 1e-4, 1e-4 - worst, 1e-4, p,
                            f"t_excess={tmins[0]:.3e}"))
    else:
        checks.append(Check("eq5_excess", EXPERIMENT, tmins[-1] > cfg.t_floor, tmins[-1] - cfg.t_floor,
                            cfg.t_floor, p, f"t_excess={tmins[0]:.5f} -> {tmins[1]:.5f}"))
        rel = abs(tmins[1] - tmins[0]) / max(abs(tmins[0]), 1e-300)
        checks.append(Check("eq5_stable", EXPERIMENT, rel <= 0.2, 0.2 - rel, 0.2, p,
                            f"relative change {rel:.3f}"))


def _schwarz_checks(f, cfg, checks):
    for r in cfg.r_list:
        p = {"r": r}
        try:
            with at(f=f.name, r=r, op="schwarz"):
                res = metric.schwarz_rigidity_check(f, r)
        except RunFailure as exc:
            if not isinstance(exc.__cause__, NotATranslate):
                raise
            expected = f.kind != "strip"
            checks.append(Check("schwarz", THEOREM, expected, 0.0 if expected else -1.0, 0.0, p,
                                "not a translate of a strip level curve"))
            continue
        err = max(abs(res.sup_ratio - 1), abs(res.r_prime - r)) if f.kind == "strip" else \
            res.sup_ratio - 1
        ok = err <= 1e-8 if f.kind == "strip" else res.sup_ratio <= 1 + 1e-8
        checks.append(Check("schwarz", THEOREM, ok, 1e-8 - err, 1e-8, p,
                            f"r'={res.r_prime:.12f} sup|g/z|={res.sup_ratio:.12f}"))


def _chain(f, cfg, checks):
    p = {"rho": cfg.chain_rho, "r1": cfg.chain_r1, "r2": cfg.chain_r2, "delta": max(cfg.delta_list)}
    with at(f=f.name, op="contradiction_chain", **p):
        tab = metric.contradiction_chain(f, cfg.chain_rho, cfg.chain_r1, cfg.chain_r2,
                                         cfg.chain_r0_list, max(cfg.delta_list))
    rows = [clean(asdict(r)) for r in tab.rows]
    if f.kind != "strip":
        checks.append(Check("contradiction_chain", EXPERIMENT, tab.contradicts and tab.decreasing,
                            -tab.rows[-1].margin, 0.0, p,
                            "margins " + ", ".join(f"{r.margin:+.5f}" for r in tab.rows)))
    with at(f=f.name, op="covering_radius"):
        rc = metric.covering_radius(f)
    rho_m = min(0.9, 0.95 * rc)
    r0_m = min(cfg.r0, 0.5 * rho_m)
    pm = {"r0": r0_m, "rho": rho_m, "delta": max(cfg.delta_list)}
    with at(f=f.name, op="modulus_comparison", **pm):
        mc = metric.modulus_comparison(f, r0_m, rho_m, max(cfg.delta_list))
    checks.append(Check("modulus_comparison", THEOREM, mc.consistent,
                        min(mc.area * (1 + 1e-3) + 1e-4 - mc.length_bound,
                            mc.area_bound + 1e-4 - mc.area), 1e-4, pm,
                        f"int L^2/(2 pi r) = {mc.length_bound:.6f} <= area = {mc.area:.6f} "
                        f"<= -(1/2pi) ln r0' = {mc.area_bound:.6f}"))
    return {"t": tab.t, "eps": tab.eps, "rows": rows, "covering_radius": rc,
            "modulus": clean({"r0": mc.r0, "rho": mc.rho, "radii": mc.radii.tolist(),
                              "lengths": mc.lengths.tolist(), "length_bound": mc.length_bound,
                              "area": mc.area, "area_bound": mc.area_bound})}


def verify_function(name, cfg):
    """Run the inequality suite for one function; returns (record, golden rows)."""
    t0 = time.perf_counter()
    f = resolve(name, cfg)
    checks, golden, timings = [], [], {}

    def timed(label, fn, *args):
        s = time.perf_counter()
        out = fn(*args)
        timings[label] = time.perf_counter() - s
        return out

    z0 = abs(complex(f(0.0)))
    d0 = abs(complex(f.deriv(0.0)) - 1)
    checks.append(Check("class_s", THEOREM, max(z0, d0) <= 1e-12, 1e-12 - max(z0, d0), 1e-12, {}))
    timed("props_1_3", _prop_checks, f, cfg, checks, golden)
    timed("prop4", _prop4_checks, f, cfg, checks, golden)
    timed("eq5", _eq5_checks, f, cfg, checks, golden)
    timed("schwarz", _schwarz_checks, f, cfg, checks)
    chain = timed("chain", _chain, f, cfg, checks) if cfg.chain else None
    timings["total_s"] = time.perf_counter() - t0
    record = {
        "function": f.name,
        "checks": [c.to_dict() for c in checks],
        "chain": chain,
        "timings": timings,
    }
    return clean(record), clean(golden)


def minkowski_suite(n, seed, max_c=4, n_grid=33):
    """Random interlaced piecewise-linear layer families plus the C = 1 equality family."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, n_grid)
    worst = math.inf
    for _ in range(n):
        c2 = 2 * int(rng.integers(1, max_c + 1))
        layers = np.sort(rng.normal(size=(c2, n_grid)), axis=0)[::-1]
        worst = min(worst, metric.minkowski_check(layers, grid).min_margin)
    v = np.abs(rng.normal(size=n_grid)) + 0.1
    eq = metric.minkowski_check(np.vstack([v, -v]), grid)
    return [
        Check("minkowski_random", THEOREM, worst >= -1e-12, worst + 1e-12, 1e-12,
              {"samples": n, "seed": seed}),
        Check("minkowski_equality", THEOREM, eq.max_equality_defect <= 1e-12,
              1e-12 - eq.max_equality_defect, 1e-12, {"C": 1}),
    ]
