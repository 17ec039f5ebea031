import json
import math
import os
from pathlib import Path

import pytest

from vertcover.cli import main, strip_timings, worker_count, write_atomic
from vertcover.config import RunConfig, parse_config
from vertcover.errors import ConfigError
from vertcover.geometry import Region

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def recorded(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify")
    code = main(["verify", "--config", str(DATA / "small.cfg"), "--out", str(out), "--record"])
    return code, out


def _close(a, b, path=""):
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert a == pytest.approx(b, rel=1e-7, abs=1e-10), path
    else:
        assert a == b, path


# -- config --------------------------------------------------------------------------------


def test_parse_config():
    cfg = parse_config("functions = strip, koebe  # two maps\nrho = 0.8\nr_list = 0.3,0.5\nchain = no\n")
    assert cfg.functions == ["strip", "koebe"] and cfg.rho == 0.8
    assert cfg.r_list == [0.3, 0.5] and cfg.chain is False
    assert cfg.eq5_interval == pytest.approx((0.55 * 0.9, 0.65 * 0.9))
    assert cfg.to_dict()["eq5_r1"] is None
    assert RunConfig().minkowski_samples == 1000


@pytest.mark.parametrize("text", [
    "rho = 1.2", "nonsense = 1", "rho 0.5", "functions = strip, nope", "delta_list = 0.1, -0.1",
    "rho = abc", "chain = maybe", "functions = series", "r_list = 0.95", "chain_r1 = 0.95",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("rho = 2\n")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "radius" in capsys.readouterr().err
    assert main(["symmetrize", "--out", str(tmp_path)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_worker_count(monkeypatch):
    monkeypatch.setenv("VERTCOVER_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("VERTCOVER_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("VERTCOVER_THREADS", "x")
    with pytest.raises(ConfigError):
        worker_count()


def test_write_atomic(tmp_path):
    p = tmp_path / "sub" / "a.txt"
    write_atomic(p, "one")
    write_atomic(p, "two")
    assert p.read_text() == "two"
    assert [x.name for x in p.parent.iterdir()] == ["a.txt"]

    with pytest.raises(TypeError):
        write_atomic(p, 5)
    assert p.read_text() == "two"
    assert [x.name for x in p.parent.iterdir()] == ["a.txt"]


# -- commands ------------------------------------------------------------------------------


def test_verify_outputs(recorded):
    code, out = recorded
    assert code == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["schema"] == 1 and report["summary"]["theorem_failures"] == 0
    names = {c["name"] for f in report["functions"] for c in f["checks"]}
    assert {"prop1", "prop2", "prop4", "class_s"} <= names
    rows = (out / "verify.csv").read_text().splitlines()
    assert rows[0].startswith("function,check,kind,passed") and len(rows) == report["summary"]["checks"] + 1


def test_golden_regression(recorded):
    _, out = recorded
    for ref in sorted(GOLDEN.glob("*.json")):
        new = json.loads((out / "golden" / ref.name).read_text())
        _close(new, json.loads(ref.read_text()), ref.stem)


def test_verify_deterministic_across_workers(tmp_path, monkeypatch):
    cfg = tmp_path / "s.cfg"
    cfg.write_text((DATA / "small.cfg").read_text().replace("strip, koebe", "strip, half_plane"))
    outs = []
    for n in ("1", "2"):
        monkeypatch.setenv("VERTCOVER_THREADS", n)
        o = tmp_path / f"o{n}"
        assert main(["verify", "--config", str(cfg), "--out", str(o)]) == 0
        outs.append(o)
    a, b = (json.loads((o / "verify.json").read_text()) for o in outs)
    assert json.dumps(strip_timings(a), sort_keys=True) == json.dumps(strip_timings(b), sort_keys=True)
    assert (outs[0] / "verify.csv").read_bytes() == (outs[1] / "verify.csv").read_bytes()


def test_analyze(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("functions = strip, koebe, two_slit\nrho_list = 0.5, 0.9\n")
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "analyze.json").read_text())
    strip = next(r for r in rep["functions"] if r["function"] == "strip")
    assert strip["l"] < math.pi / 2 and strip["reachable"]
    koebe = next(r for r in rep["functions"] if r["function"] == "koebe")
    assert koebe["l"] > math.pi / 2 and koebe["exceeds_half_pi"]
    svg = (tmp_path / "analyze_koebe.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert "koebe" in capsys.readouterr().out
    assert len((tmp_path / "analyze.csv").read_text().splitlines()) == 1 + 3 * 2


def test_series_requires_certification(tmp_path):
    s = tmp_path / "s.txt"
    s.write_text("0 0 0\n1 1 0\n2 0.1 0\n")
    cfg = tmp_path / "c.cfg"
    base = f"functions = series\nseries_file = {s}\nchain = false\nminkowski_samples = 10\n"
    cfg.write_text(base)
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "v")]) == 2
    # analyze is exploratory and runs on uncertified input
    cfg.write_text(base + "rho_list = 0.5\n")
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0


def test_symmetrize(tmp_path, capsys):
    R = Region([[(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 2), (1, 2), (1, 2.5), (0, 2.5)]])
    src = tmp_path / "r.json"
    src.write_text(json.dumps(R.to_dict()))
    assert main(["symmetrize", str(src), "--out", str(tmp_path)]) == 0
    S = Region.from_dict(json.loads((tmp_path / "symmetrized.json").read_text()))
    assert S.area() == pytest.approx(1.5)
    assert S.section(0.5).intervals.tolist() == [[-0.75, 0.75]]
    assert (tmp_path / "symmetrize.svg").exists()
    assert "area before 1.5 after 1.5" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["symmetrize", str(bad), "--out", str(tmp_path)]) == 2


def test_report(tmp_path, capsys):
    assert main(["report", str(GOLDEN), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "report.md").read_text()
    assert "| koebe | 0.1 |" in text and "## Area bound" in text
    assert main(["report", str(tmp_path / "none"), "--out", str(tmp_path)]) == 0
    assert "No golden files" in (tmp_path / "report.md").read_text()


def test_strict_flag_and_exit(tmp_path):
    cfg = tmp_path / "c.cfg"
    # an unreachable half-length floor turns the experiment checks into failures
    cfg.write_text((DATA / "small.cfg").read_text().replace("strip, koebe", "koebe") + "prop3_floor = 0.9\n")
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "b"), "--strict"]) == 1
    assert os.path.exists(tmp_path / "b" / "verify.json")
