import csv
import json
import math
import subprocess
import sys

import pytest

from modtopo.cli import main


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "a": _write(tmp_path / "a.json", {"dist": [[0, 1], [1, 0]]}),
        "b": _write(tmp_path / "b.json", {"dist": [[0, 3], [3, 0]]}),
        "c": _write(tmp_path / "c.json", {"dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]}),
        "bad": _write(tmp_path / "bad.json", {"dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}),
        "mx": _write(tmp_path / "mx.json", {"base": {"type": "flat_torus"}, "n": 36,
                                            "conformal": {"fourier": [[1, 0, 0.2]]}}),
        "my": _write(tmp_path / "my.json", {"base": {"type": "flat_torus"}, "n": 36,
                                            "conformal": {"fourier": [[0, 1, 0.2]]}}),
    }


def test_validate(files, tmp_path, capsys):
    assert main(["validate", files["a"]]) == 0
    assert main(["validate", files["bad"]]) == 2
    assert "TriangleViolation(0, 2, 1)" in capsys.readouterr().err
    (tmp_path / "m.json").write_text("{")
    assert main(["validate", str(tmp_path / "m.json")]) == 2


@pytest.mark.parametrize("kind, value", [("gh", 1.0), ("eps", 2.0), ("lip", math.log(3))])
def test_dist_exact(files, tmp_path, kind, value):
    out = tmp_path / "r.json"
    assert main(["dist", kind, "--x", files["a"], "--y", files["b"], "--method", "exact",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["upper"] == pytest.approx(value, abs=1e-15)
    assert doc["method"] == "exact" and doc["seed"] == 0
    assert "witness" in doc and "wall_ms" in doc


def test_dist_anneal_deterministic(files, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["dist", "gh", "--x", files["a"], "--y", files["c"], "--method", "anneal",
                     "--budget", "100", "--seed", "18446744073709551615", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        doc.pop("wall_ms")
        outs.append(doc)
    assert outs[0] == outs[1]
    assert outs[0]["lower"] <= outs[0]["upper"]


def test_lip_infinite(files, tmp_path):
    out = tmp_path / "r.json"
    assert main(["dist", "lip", "--x", files["a"], "--y", files["c"], "--out", str(out)]) == 0
    assert json.loads(out.read_text())["value"] == "inf"


def test_seed_must_be_u64(files):
    with pytest.raises(SystemExit):
        main(["dist", "gh", "--x", files["a"], "--y", files["b"], "--seed", "-1"])
    with pytest.raises(SystemExit):
        main(["dist", "gh", "--x", files["a"], "--y", files["b"], "--seed", str(2**64)])


def test_gen_and_sl(files, tmp_path):
    space = tmp_path / "s.json"
    assert main(["gen", "--manifold", files["mx"], "--out", str(space)]) == 0
    assert main(["validate", str(space)]) == 0
    side = tmp_path / "s.params.json"
    assert side.exists()
    out = tmp_path / "sl.json"
    assert main(["dist", "sl", "--manifold-x", str(side), "--manifold-y", files["my"],
                 "--degree", "1", "--budget", "150", "--restarts", "2", "--seed", "1",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["value"] >= 0 and doc["padding"] >= 0
    assert set(doc["witness"]) >= {"matrix", "translation", "flow"}


def test_conformal_density_experiment(tmp_path):
    cfg = _write(tmp_path / "exp.json", {
        "base": {"type": "flat_torus"},
        "target": {"type": "flat_torus", "conformal": {"fourier": [[1, 0, 0.25]]}},
        "n_samples": 36, "budget": 40, "inner_budget": 200, "final_budget": 500,
        "thresholds": {"max_ratio": 0.5}})
    # target given without a "base" wrapper is a parse error
    assert main(["experiment", "conformal-density", "--config", cfg,
                 "--out", str(tmp_path / "h.csv")]) == 2
    cfg = _write(tmp_path / "exp.json", {
        "base": {"base": {"type": "flat_torus"}},
        "target": {"base": {"type": "flat_torus"}, "conformal": {"fourier": [[1, 0, 0.25]]}},
        "n_samples": 36, "budget": 40, "inner_budget": 200, "final_budget": 500,
        "thresholds": {"max_ratio": 0.5}})
    h = tmp_path / "h.csv"
    assert main(["experiment", "conformal-density", "--config", cfg, "--out", str(h)]) == 0
    rows = list(csv.DictReader(h.open()))
    assert float(rows[-1]["gh_upper"]) <= 0.5 * float(rows[0]["gh_upper"])


def test_certify_exit_codes(tmp_path):
    out = tmp_path / "c.json"
    assert main(["certify", "--suite", "diameter-bounds", "--trials", "20", "--seed", "3",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    assert main(["certify", "--suite", "lemma-sandwich", "--trials", "20",
                 "--tol-abs", "0", "--tol-rel", "0"]) == 2


def test_console_script(files):
    r = subprocess.run([sys.executable, "-m", "modtopo.cli", "dist", "gh", "--x", files["a"],
                        "--y", files["b"]], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["upper"] == 1.0
