import csv
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouville.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, run
from liouville.io import dumps, fmt

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_cfg(tmp_path, name, cfg):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return path


def invoke(tmp_path, cmd, cfg_path, *extra):
    return run([cmd, "--config", str(cfg_path), "--out", str(tmp_path / "out"), "--quiet", *extra])


def outdir(tmp_path, cmd, cfg_path):
    return tmp_path / "out" / f"{cmd}-{Path(cfg_path).stem}"


def test_solve_layout(tmp_path):
    cfg = CONFIGS / "bubble.json"
    assert invoke(tmp_path, "solve", cfg) == EXIT_OK
    d = outdir(tmp_path, "solve", cfg)
    assert sorted(p.name for p in d.iterdir()) == ["meta.json", "profile.csv", "report.json"]
    rep = json.loads((d / "report.json").read_text())
    assert rep["sigma"][0] == pytest.approx(4.0, abs=1e-8)
    assert rep["config"]["options"]["rel_tol"] == 1e-10
    with open(d / "profile.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "r", "u_1", "ru_1'"]
    assert len(rows) == rep["diagnostics"]["steps"] + 2


def test_report_is_byte_identical(tmp_path):
    cfg = CONFIGS / "sym2.json"
    first = tmp_path / "a"
    second = tmp_path / "b"
    run(["jacobian", "--config", str(cfg), "--out", str(first), "--quiet"])
    run(["jacobian", "--config", str(cfg), "--out", str(second), "--quiet"])
    name = "jacobian-sym2/report.json"
    assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.mark.parametrize("cfg, message", [
    ({"A": [[1.0, 0.5], [0.4, 1.0]], "beta": [0.0]}, "NotSymmetric"),
    ({"A": [[1.0]], "beta": [0.0], "bogus": 1}, "ConfigError"),
    ({"A": [[1.0]], "beta": [0.0], "options": {"rtol": 1e-6}}, "ConfigError"),
    ({"A": [[1.0]], "beta": [0.0], "options": {"rel_tol": -1}}, "ConfigError"),
    ({"A": [[1.0, 0.5], [0.5, 1.0]], "beta": [0.0, 0.0, 0.0]}, "ConfigError"),
    ({"beta": [0.0]}, "ConfigError"),
])
def test_config_errors(tmp_path, capsys, cfg, message):
    path = write_cfg(tmp_path, "bad", cfg)
    assert invoke(tmp_path, "solve", path) == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == message
    assert err["exit_code"] == EXIT_CONFIG


def test_unreadable_config(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert invoke(tmp_path, "solve", path) == EXIT_CONFIG


def test_nonconvergence_exit(tmp_path, capsys):
    path = write_cfg(tmp_path, "swap", {"A": [[0.0, 1.0], [1.0, 0.0]], "beta": [1.0, 0.0]})
    assert invoke(tmp_path, "masses", path) == EXIT_SOLVER
    assert json.loads(capsys.readouterr().err)["error"] == "NotConverged"
    meta = json.loads((outdir(tmp_path, "masses", path) / "meta.json").read_text())
    assert meta["exit_code"] == EXIT_SOLVER


def test_verify_passes(tmp_path, capsys):
    cfg = CONFIGS / "sym2.json"
    assert run(["verify", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)
    with open(tmp_path / "verify-sym2" / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["R", "nonlinear_residual", "linear_residual"]
    assert len(rows) == 4


def test_verify_failure_exit(tmp_path):
    # loose integration tolerances push the invariants past their thresholds
    path = write_cfg(tmp_path, "loose", {"A": [[1.0, 0.5], [0.5, 1.0]], "beta": [0.0],
                                         "options": {"rel_tol": 1e-4, "abs_tol": 1e-5}})
    assert invoke(tmp_path, "verify", path) == EXIT_VERIFY


def test_invert(tmp_path):
    cfg = CONFIGS / "invert_sym2.json"
    assert invoke(tmp_path, "invert", cfg) == EXIT_OK
    rep = json.loads((outdir(tmp_path, "invert", cfg) / "report.json").read_text())
    assert rep["sigma"][0] == pytest.approx(2.2, abs=1e-8)


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_sweep(tmp_path, jobs):
    cfg = CONFIGS / "sweep_sym2.json"
    assert invoke(tmp_path, "sweep", cfg, "--jobs", jobs) == EXIT_OK
    d = outdir(tmp_path, "sweep", cfg)
    rep = json.loads((d / "report.json").read_text())
    assert rep["n_points"] == 5 and rep["violations"] == []
    with open(d / "trace.csv") as fh:
        assert len(list(csv.reader(fh))) == 6


def test_duplicate_sweep_point(tmp_path, capsys):
    path = write_cfg(tmp_path, "dup", {"A": [[1.0, 0.5], [0.5, 1.0]],
                                       "grid": {"points": [[0.0], [0.0]]}})
    assert invoke(tmp_path, "sweep", path) == EXIT_CONFIG
    assert json.loads(capsys.readouterr().err)["error"] == "DuplicateGridPoint"


def test_continuation(tmp_path):
    cfg = CONFIGS / "continuation_swap.json"
    assert invoke(tmp_path, "continuation", cfg) == EXIT_OK
    rep = json.loads((outdir(tmp_path, "continuation", cfg) / "report.json").read_text())
    assert [r["eps"] for r in rep["reports"]] == [0.1, 0.01, 0.001, 0.0]


def test_environment_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("LIOUVILLE_OUT", str(tmp_path / "env"))
    assert run(["solve", "--config", str(CONFIGS / "bubble.json"), "--quiet"]) == EXIT_OK
    assert (tmp_path / "env" / "solve-bubble" / "report.json").exists()


def test_tol_flag_recorded(tmp_path):
    cfg = CONFIGS / "bubble.json"
    invoke(tmp_path, "solve", cfg, "--tol", "1e-9")
    rep = json.loads((outdir(tmp_path, "solve", cfg) / "report.json").read_text())
    assert rep["config"]["options"]["rel_tol"] == 1e-9


@pytest.mark.skipif(shutil.which("liouville") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["liouville", "solve", "--config", str(CONFIGS / "bubble.json"),
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["sigma"][0] == pytest.approx(4.0, abs=1e-8)


def test_module_help():
    res = subprocess.run([sys.executable, "-m", "liouville.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "sigma_head" in res.stdout


def test_dumps_special_values():
    text = dumps({"a": math.inf, "b": np.float64(0.1), "c": np.bool_(True), "d": [1, None]})
    assert json.loads(text) == {"a": None, "b": 0.1, "c": True, "d": [1, None]}


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x
