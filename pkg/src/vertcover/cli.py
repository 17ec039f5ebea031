"""``vertcover analyze|verify|symmetrize|report``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import RunConfig, load_config
from .errors import ConfigError, VertcoverError
from .geometry import Region, max_vertical_segment, steiner_symmetrize
from .runs import EXPERIMENT, THEOREM, analyze_function, clean, minkowski_suite, verify_function
from .svg import Figure

SCHEMA = 1
log = logging.getLogger("vertcover")


# -- output helpers ------------------------------------------------------------------


def write_atomic(path, text):
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj):
    return json.dumps(clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def dump_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def strip_timings(obj):
    """Drop every ``timings`` field (the only nondeterministic part of a report)."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k != "timings"}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def worker_count():
    raw = os.environ.get("VERTCOVER_THREADS", "")
    try:
        n = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise ConfigError(f"VERTCOVER_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def pool_map(fn, names, cfg):
    """Run ``fn(name, cfg)`` for each name; results come back in input order."""
    n = min(worker_count(), len(names))
    if n <= 1:
        return [fn(name, cfg) for name in names]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, names, [cfg] * len(names)))


# -- commands ------------------------------------------------------------------------


def cmd_analyze(cfg, out):
    results = pool_map(analyze_function, cfg.functions, cfg)
    records = [r for r, _ in results]
    for rec, svg in results:
        write_atomic(out / f"analyze_{_slug(rec['function'])}.svg", svg)
    rows = [(rec["function"], row["rho"], row["l"], row["u0"], row["reachable"])
            for rec in records for row in rec["rows"]]
    write_atomic(out / "analyze.csv", dump_csv(["function", "rho", "l", "u0", "reachable"], rows))
    report = {"schema": SCHEMA, "command": "analyze", "config": cfg.to_dict(), "functions": records}
    write_atomic(out / "analyze.json", dump_json(report))
    for rec in records:
        print(f"{rec['function']:>12}: l = {rec['l']:.6f} at u0 = {rec['u0']:.6g} "
              f"(rho = {rec['rho_at_l']}), reachable = {rec['reachable']}, |a1| = {rec['abs_a1']:.9f}")
    failed = [rec["function"] for rec in records if not rec["reachable"]]
    return 1 if failed else 0


def cmd_verify(cfg, out):
    results = pool_map(verify_function, cfg.functions, cfg)
    mink = [c.to_dict() for c in minkowski_suite(cfg.minkowski_samples, cfg.seed)]
    records = [r for r, _ in results]
    all_checks = [(rec["function"], c) for rec in records for c in rec["checks"]]
    all_checks += [("-", c) for c in mink]
    theorem_fail = [(fn, c) for fn, c in all_checks if c["kind"] == THEOREM and not c["passed"]]
    exp_fail = [(fn, c) for fn, c in all_checks if c["kind"] == EXPERIMENT and not c["passed"]]
    rows = [(fn, c["name"], c["kind"], c["passed"], c["margin"], c["tol"],
             json.dumps(c["params"], sort_keys=True)) for fn, c in all_checks]
    write_atomic(out / "verify.csv",
                 dump_csv(["function", "check", "kind", "passed", "margin", "tol", "params"], rows))
    report = {"schema": SCHEMA, "command": "verify", "config": cfg.to_dict(),
              "functions": records, "minkowski": mink,
              "summary": {"checks": len(all_checks), "theorem_failures": len(theorem_fail),
                          "experiment_failures": len(exp_fail)}}
    write_atomic(out / "verify.json", dump_json(report))
    if cfg.record:
        gdir = Path(cfg.golden_dir) if cfg.golden_dir else out / "golden"
        for rec, golden in zip(records, [g for _, g in results]):
            write_atomic(gdir / f"{_slug(rec['function'])}.json",
                         dump_json({"schema": SCHEMA, "function": rec["function"], "records": golden,
                                    "chain": rec["chain"]}))
    for fn, c in theorem_fail:
        print(f"FAIL [{fn}] {c['name']} {c['params']}: margin {c['margin']} ({c['detail']})")
    for fn, c in exp_fail:
        tag = "FAIL" if cfg.strict else "WARN"
        print(f"{tag} [{fn}] {c['name']} {c['params']}: margin {c['margin']} ({c['detail']})")
    print(f"{len(all_checks)} checks, {len(theorem_fail)} theorem failures, "
          f"{len(exp_fail)} experiment failures")
    return 1 if theorem_fail or (cfg.strict and exp_fail) else 0


def cmd_symmetrize(path, out):
    try:
        R = Region.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"cannot read region file {path}: {exc}") from exc
    S = steiner_symmetrize(R)
    a0, a1 = R.area(), S.area()
    seg_before = max_vertical_segment(R)
    seg_after = max_vertical_segment(S)
    write_atomic(out / "symmetrized.json", dump_json({"schema": SCHEMA, **S.to_dict()}))
    fig = Figure()
    fig.region(R)
    fig.region(S, fill="sym", edge="sym_edge", opacity=0.5)
    write_atomic(out / "symmetrize.svg", fig.render())
    print(f"area before {a0:.12g} after {a1:.12g} delta {a1 - a0:.3e}")
    print(f"longest vertical segment before {seg_before.length:.12g}, "
          f"max cross-section (after) {seg_after.length:.12g}")
    return 0


def _fmt(x, spec=".6g"):
    return "-" if x is None else format(x, spec)


def cmd_report(golden_dir, out):
    golden_dir = Path(golden_dir)
    files = sorted(golden_dir.glob("*.json")) if golden_dir.is_dir() else []
    lines = ["# vertcover summary", ""]
    if not files:
        lines += [f"No golden files found in `{golden_dir}`.", ""]
    data = []
    for p in files:
        try:
            data.append(json.loads(p.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            lines.append(f"- unreadable golden file `{p.name}`: {exc}")
    # eps(delta)
    lines += ["## Half-length bound shortfall eps(delta)", "", "| function | r | delta | value | eps_report |",
              "|---|---|---|---|---|"]
    for d in data:
        for g in d["records"]:
            if g.get("quantity") == "prop3_value":
                lines.append(f"| {d['function']} | {g['r']} | {g['delta']} | {_fmt(g['value'], '.6f')} "
                             f"| {_fmt(g['eps_report'], '.2e')} |")
    lines += ["", "## r0'/r0 versus r0", "", "| function | r0 | r0'/r0 |", "|---|---|---|"]
    for d in data:
        for g in d["records"]:
            if g.get("quantity") == "r0_ratio":
                for r0, v in zip(g["r0"], g["value"]):
                    lines.append(f"| {d['function']} | {r0} | {_fmt(v, '.6f')} |")
    lines += ["", "## Area bound", "", "| function | side | value | bound (r0') | bound (r0) |",
              "|---|---|---|---|---|"]
    for d in data:
        for g in d["records"]:
            if g.get("quantity") == "prop4_value":
                lines.append(f"| {d['function']} | {g['side']} | {_fmt(g['value'], '.6f')} | "
                             f"{_fmt(g['bound'], '.6f')} | {_fmt(g['bound_statement'], '.6f')} |")
    lines += ["", "## Length excess t", "", "| function | r | delta | t_excess |", "|---|---|---|---|"]
    for d in data:
        for g in d["records"]:
            if g.get("quantity") == "eq5":
                lines.append(f"| {d['function']} | {g['r']:.4f} | {g['delta']} | {_fmt(g['t_excess'], '.3e')} |")
    lines += ["", "## Final inequality margins (negative = contradiction reached)", "",
              "| function | t | r0 | r0' | lhs | rhs | margin |", "|---|---|---|---|---|---|---|"]
    for d in data:
        ch = d.get("chain")
        if not ch:
            continue
        for row in ch["rows"]:
            lines.append(f"| {d['function']} | {_fmt(ch['t'], '.4f')} | {row['r0']} | "
                         f"{_fmt(row['r0_prime'], '.6f')} | {_fmt(row['lhs'], '.5f')} | "
                         f"{_fmt(row['rhs'], '.5f')} | {_fmt(row['margin'], '+.5f')} |")
    text = "\n".join(lines) + "\n"
    write_atomic(out / "report.md", text)
    sys.stdout.write(text)
    return 0


def _slug(name):
    return "".join(ch if ch.isalnum() or ch in "_-" else "_" for ch in name)


# -- entry point -----------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="vertcover",
                                 description="Numerical checks of the vertical-segment covering theorem.")
    ap.add_argument("command", choices=["analyze", "verify", "symmetrize", "report"])
    ap.add_argument("input", nargs="?", help="region file (symmetrize) or golden dir (report)")
    ap.add_argument("--config", help="flat key = value configuration file")
    ap.add_argument("--record", action="store_true", help="write golden JSON files (verify)")
    ap.add_argument("--strict", action="store_true", help="experiment-grade failures are fatal")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.record:
            cfg.record = True
        if args.strict:
            cfg.strict = True
        out = Path(args.out or cfg.out)
        if args.command == "analyze":
            return cmd_analyze(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "symmetrize":
            if not args.input:
                raise ConfigError("symmetrize needs a region file")
            return cmd_symmetrize(args.input, out)
        golden = args.input or cfg.golden_dir or str(out / "golden")
        return cmd_report(golden, out)
    except (ConfigError, VertcoverError) as exc:
        print(f"vertcover: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
