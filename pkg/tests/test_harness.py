import csv
import json
import math
import subprocess
import sys

import pytest

from samplerec.errors import InvalidConfig
from samplerec.harness import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main, parse_config

PIPE = """
mode = pipeline   # comment
model = fourier_sobolev
alpha = 1.0
M = 64
grid = 128
m_list = 4, 8
seeds = 0, 1
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_defaults_and_types():
    cfg = parse_config(PIPE)
    assert cfg["m_list"] == [4, 8] and cfg["alpha"] == 1.0 and cfg["M"] == 64
    assert cfg["C"] == 8.0 and cfg["t"] == 0.5


@pytest.mark.parametrize("text", [
    "foo = 1",
    "alpha = abc",
    "M = 4096",
    "model = nope",
    "alpha",
    "seeds = -1",
    "alpha = 1\nalpha = 2",
])
def test_parse_rejects(text):
    with pytest.raises(InvalidConfig):
        parse_config(text)


def test_exit_codes_config(tmp_path):
    assert main(["pipeline", "--config", write(tmp_path, "foo = 1"), "--quiet"]) == EXIT_CONFIG
    assert main(["adversary", "--config", write(tmp_path, PIPE), "--quiet"]) == EXIT_CONFIG
    assert main(["pipeline", "--config", str(tmp_path / "missing.cfg"), "--quiet"]) == EXIT_CONFIG
    cfg = write(tmp_path, PIPE.replace("m_list = 4, 8", "m_list = 64"))
    assert main(["pipeline", "--config", cfg, "--quiet"]) == EXIT_CONFIG


def test_pipeline_outputs_and_determinism(tmp_path):
    cfg = write(tmp_path, PIPE)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["pipeline", "--config", cfg, "--out", str(a), "--quiet"]) == EXIT_OK
    assert main(["pipeline", "--config", cfg, "--out", str(b), "--quiet"]) == EXIT_OK
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    rows = list(csv.DictReader(open(a / "results.csv")))
    assert [(r["m"], r["seed"]) for r in rows] == [("4", "0"), ("4", "1"), ("8", "0"), ("8", "1")]
    for r in rows:
        assert float(r["g_emp_ls"]) ** 2 <= float(r["bound_local"]) + 1e-10
    rep = json.load(open(a / "report.json"))
    assert rep["schema_version"] and rep["rng"].startswith("numpy.random.PCG64")
    assert rep["status"] == "ok" and len(rep["rows"]) == 4


def test_seed_override(tmp_path):
    out = tmp_path / "o"
    cfg = write(tmp_path, PIPE)
    assert main(["pipeline", "--config", cfg, "--out", str(out), "--seeds", "5", "--quiet"]) == 0
    rows = list(csv.DictReader(open(out / "results.csv")))
    assert {r["seed"] for r in rows} == {"5"}
    assert main(["pipeline", "--config", cfg, "--seeds", "x", "--quiet"]) == EXIT_CONFIG


def test_finite_rank_rows(tmp_path):
    text = "model = finite_rank\nrank = 5\ngrid = 64\nm_list = 5\nseeds = 0, 1, 2\n"
    out = tmp_path / "fr"
    assert main(["pipeline", "--config", write(tmp_path, text), "--out", str(out), "--quiet"]) == 0
    for r in csv.DictReader(open(out / "results.csv")):
        assert float(r["g_emp_ls"]) <= 1e-9


def test_failures_reported_with_exit_2(tmp_path):
    text = PIPE + "max_attempts = 1\nC = 0.5\n"
    out = tmp_path / "f"
    assert main(["pipeline", "--config", write(tmp_path, text), "--out", str(out), "--quiet"]) \
        == EXIT_FAILED
    rep = json.load(open(out / "report.json"))
    assert rep["status"] == "failed"
    assert all(r["status"].endswith("failure") for r in rep["rows"])
    rows = list(csv.DictReader(open(out / "results.csv")))
    assert len(rows) == 4 and rows[0]["g_emp_ls"] == "nan"
    # NaN never reaches the JSON
    assert "NaN" not in (out / "report.json").read_text()


def test_spline_compare(tmp_path):
    text = PIPE.replace("mode = pipeline", "mode = spline-compare")
    out = tmp_path / "s"
    assert main(["spline-compare", "--config", write(tmp_path, text), "--out", str(out),
                 "--quiet"]) == 0
    rep = json.load(open(out / "report.json"))
    assert all(r["ordered"] for r in rep["comparison"])
    assert all(r["g_emp_spline"] <= r["g_emp_ls"] + 1e-10 for r in rep["comparison"])


def test_rate(tmp_path):
    text = "model = fourier_sobolev\nM = 128\ngrid = 256\nm_list = 4, 8, 16\nseeds = 0, 1\n"
    out = tmp_path / "r"
    assert main(["rate", "--config", write(tmp_path, text), "--out", str(out), "--quiet"]) == 0
    rep = json.load(open(out / "report.json"))
    assert set(rep["medians"]) == {"4", "8", "16"}
    assert -1.5 < rep["fit"]["slope"] < -0.5


def test_adversary(tmp_path):
    text = "model = haar\nbeta = 2\nn_list = 8, 16\nseeds = 0\n"
    out = tmp_path / "h"
    assert main(["adversary", "--config", write(tmp_path, text), "--out", str(out),
                 "--quiet"]) == 0
    rows = list(csv.DictReader(open(out / "results.csv")))
    assert len(rows) == 2
    for r in rows:
        assert abs(float(r["max_abs_at_points"])) <= 1e-12 and r["budget_ok"] == "true"
        n = int(r["n"])
        assert math.isclose(float(r["normalized"]),
                            float(r["l2_norm"]) * math.sqrt(n) * math.log(n), rel_tol=1e-12)


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "model = haar\nn_list = 4\nseeds = 0\n")
    res = subprocess.run([sys.executable, "-m", "samplerec", "adversary", "--config", cfg,
                          "--out", str(tmp_path / "e"), "--quiet"], capture_output=True)
    assert res.returncode == 0
    res = subprocess.run([sys.executable, "-m", "samplerec", "pipeline", "--config", cfg,
                          "--quiet"], capture_output=True)
    assert res.returncode == EXIT_CONFIG
