from __future__ import annotations

import hashlib
import json
import math
import subprocess
import sys

import pytest

from tentop import cli, suite
from tentop.suite import CriterionResult


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def write_yaml(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_norm_bounds_json(tmp_path):
    code, out = run(tmp_path, "norm-bounds", "--pq", "4,4", "--pq", "4,8", "--format", "json")
    assert code == 0
    assert not (out / "norm-bounds.csv").exists()
    rows = json.loads((out / "norm-bounds.json").read_text())["rows"]
    assert abs(rows[0]["lower"] - math.pi) <= 1e-12
    assert abs(rows[1]["lower"] - math.pi / math.sin(3 * math.pi / 8)) <= 1e-12
    assert all(r["lower"] < r["upper"] for r in rows)


def test_norm_bounds_outside_regime_exits_2(tmp_path, capsys):
    code, out = run(tmp_path, "norm-bounds", "--pq", "2,4")
    assert code == 2
    assert "1/p+1/q < 1" in capsys.readouterr().err
    assert not out.exists()


def test_carleson_classify_from_yaml(tmp_path):
    cfg = write_yaml(tmp_path, "command: carleson-classify\nparams: [[4, 4]]\nmeasures: [lebesgue, 'pow:1', logweight]\n")
    code, out = run(tmp_path, "--config", cfg)
    assert code == 0
    rows = {r["measure"]: r for r in json.loads((out / "carleson-classify.json").read_text())["rows"]}
    assert rows["lebesgue"]["is_1CM"] and not rows["lebesgue"]["is_1VCM"]
    assert rows["pow:1"]["is_1VCM"]
    assert not rows["logweight"]["is_1CM"]
    assert (out / "tail-ratio_lebesgue.dat").exists() and (out / "plot.gp").exists()


def test_tent_norm_reports_divergence(tmp_path):
    code, out = run(tmp_path, "tent-norm", "--pq", "4,4", "--function", "cauchy", "--function", "const:1")
    assert code == 0
    lines = (out / "tent-norm.csv").read_text().splitlines()
    assert lines[1].split(",")[3] == "diverges"
    assert float(lines[2].split(",")[3]) == pytest.approx(1.0, rel=1e-8)


def test_hilbert_apply_matches_closed_form(tmp_path):
    code, out = run(tmp_path, "hilbert-apply", "--function", "const:1", "--point", "0.5", "--point=-0.5+0.5j")
    assert code == 0
    rows = json.loads((out / "hilbert-apply.json").read_text())["rows"]
    for r in rows:
        z = complex(r["z_re"], r["z_im"])
        exact = -__import__("cmath").log(1 - z) / z
        assert abs(complex(r["value_re"], r["value_im"]) - exact) <= 1e-9
        assert r["err_estimate"] <= 1e-8


@pytest.mark.parametrize("text,needle", [
    ("command: norm-bounds\nparams: [[4, 4]]\nbogus: 1\n", "unknown config keys"),
    ("command: norm-bounds\nparams: [[4, 4]\n", "cannot parse"),
    ("command: launch\n", "command must be"),
    ("command: tent-norm\nparams: [[4, 4]]\n", "at least one function"),
    ("command: norm-bounds\nparams: [[4, 4]]\ngrid: {n_gl: -3}\n", "grid"),
])
def test_bad_config_exits_2(tmp_path, capsys, text, needle):
    code, _ = run(tmp_path, "--config", write_yaml(tmp_path, text))
    assert code == 2
    assert needle in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    code, _ = run(tmp_path, "--config", str(tmp_path / "nope.yaml"))
    assert code == 2


def test_unsettled_refinement_exits_3(tmp_path, capsys):
    cfg = write_yaml(tmp_path, "command: tent-norm\nparams: ['4,8']\nfunctions: ['power:0.3']\n"
                               "quadrature: {rel_tol: 1.0e-14}\ngrid: {max_level: 1}\n")
    code, out = run(tmp_path, "--config", cfg)
    assert code == 3
    assert "did not settle" in capsys.readouterr().err
    assert "false" in (out / "tent-norm.csv").read_text()


def test_outputs_byte_identical_and_lf(tmp_path):
    argv = ("probe-norm", "--pq", "4,8", "--alpha", "0", "--alpha", "0.5", "--engine", "matrix")
    code_a, a = run(tmp_path, *argv, name="a")
    code_b, b = run(tmp_path, *argv, name="b")
    assert code_a == code_b == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert {"manifest.json", "probe-norm_p4_q8.csv", "probe-norm_p4_q8.json", "probe-norm_p4_q8.dat", "plot.gp"} <= set(names)
    for n in names:
        data = (a / n).read_bytes()
        assert data == (b / n).read_bytes(), n
        assert b"\r" not in data


def test_manifest_records_hashes_and_errors(tmp_path):
    code, out = run(tmp_path, "norm-bounds", "--pq", "4,8")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["tool"] == "tentop" and man["command"] == "norm-bounds"
    assert man["seed"] == 0xC0FFEE
    for name, digest in man["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert man["grid"]["levels"]
    assert "timestamp" not in json.dumps(man)
    values = man["values"]
    assert values and "err" in json.dumps(values)


def test_config_hash_ignores_output_dir(tmp_path):
    _, a = run(tmp_path, "norm-bounds", "--pq", "4,8", name="x")
    _, b = run(tmp_path, "norm-bounds", "--pq", "4,8", name="y")
    ha = json.loads((a / "manifest.json").read_text())["config_hash"]
    hb = json.loads((b / "manifest.json").read_text())["config_hash"]
    assert ha == hb


def test_seed_enters_config_hash(tmp_path, monkeypatch):
    monkeypatch.delenv("TENTOP_SEED", raising=False)
    _, a = run(tmp_path, "norm-bounds", "--pq", "4,8", name="x")
    monkeypatch.setenv("TENTOP_SEED", "7")
    _, b = run(tmp_path, "norm-bounds", "--pq", "4,8", name="y")
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in (a, b))
    assert mb["seed"] == 7 and ma["config_hash"] != mb["config_hash"]


def test_probe_norm_matrix_limit_is_recorded(tmp_path):
    code, out = run(tmp_path, "probe-norm", "--pq", "4,4", "--alpha", "0.99", "--engine", "matrix")
    assert code == 0
    doc = json.loads((out / "probe-norm_p4_q4.json").read_text())
    assert doc["notes"]["scope"].startswith("outside")
    assert doc["rows"][0]["ratio"] is None
    assert "limited" in doc["rows"][0]["err_estimate"]


def test_probe_compactness_zero_measure(tmp_path):
    code, out = run(tmp_path, "probe-compactness", "--measure", "zero", "--pq", "4,4", "--alpha", "0", "--alpha", "0.9")
    assert code == 0
    rows = json.loads((out / "probe-compactness_zero_p4_q4.json").read_text())["rows"]
    assert [r["norm"] for r in rows] == [0.0, 0.0]


def test_jobs_do_not_change_output(tmp_path):
    argv = ("norm-bounds", "--pq", "4,4", "--pq", "4,8", "--pq", "3,6")
    _, a = run(tmp_path, *argv, name="serial")
    code = cli.main([*argv, "--jobs", "2", "--out", str(tmp_path / "par")])
    assert code == 0
    for p in a.iterdir():
        assert p.read_bytes() == (tmp_path / "par" / p.name).read_bytes()


def test_verify_suite_subset_passes(tmp_path, capsys):
    code, out = run(tmp_path, "verify-suite", "--criteria", "3", "10")
    printed = capsys.readouterr().out.splitlines()
    assert code == 0
    assert [l.split()[0] for l in printed] == ["[PASS]"] * 3
    assert "criterion 13" in printed[-1]


def test_verify_suite_failure_exits_1(tmp_path, monkeypatch):
    def failing():
        return CriterionResult(3, "forced failure", False, {"x": 1.0}, "x < 0")

    monkeypatch.setitem(suite.CHECKS, 3, failing)
    code, _ = run(tmp_path, "verify-suite", "--criteria", "3")
    assert code == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tentop", "norm-bounds", "--pq", "4,4", "--out", str(tmp_path / "m")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "norm-bounds.csv").exists()
