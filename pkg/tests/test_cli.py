import csv
import json
import math
import os
import shutil
import subprocess

import pytest

from curvedvortex import cli

FLAT = {"lambda": 1.0, "G": 0.0, "g0": 1.0, "points": [[0.0, 0.0]], "grid": {"R": 20.0, "n": 257}}
RADIAL = {"lambda": 2.0, "G": 0.5 / (16 * math.pi), "g0": 1.0, "points": [[0, 0], [0, 0]],
          "radial": {"r_min": 1e-3, "r_max": 1e3}}


def _cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _only_dir(out):
    (d,) = os.listdir(out)
    return os.path.join(out, d)


def test_solve_planar(tmp_path):
    out = tmp_path / "runs"
    code = cli.run(["solve-planar", "--config", _cfg(tmp_path, FLAT), "--out", str(out), "--quiet"])
    assert code == 0
    d = _only_dir(out)
    assert os.path.basename(d).startswith("solve-planar-")
    for f in ("fields.csv", "telemetry.json", "report.json", "report.csv", "manifest.json"):
        assert os.path.exists(os.path.join(d, f))
    rep = json.load(open(os.path.join(d, "report.json")))
    assert abs(rep["flux"] / (2 * math.pi) - 1) < 0.01
    man = json.load(open(os.path.join(d, "manifest.json")))
    assert man["status"] == "ok" and man["exit_code"] == 0 and man["version"]
    assert man["config"]["grid"]["n"] == 257 and man["wall_clock_seconds"] > 0


def test_solve_radial(tmp_path):
    out = tmp_path / "runs"
    assert cli.run(["solve-radial", "--config", _cfg(tmp_path, RADIAL), "--out", str(out), "--quiet"]) == 0
    d = _only_dir(out)
    tel = json.load(open(os.path.join(d, "telemetry.json")))
    assert [p["status"] for p in tel["properties"]] == ["pass"] * 4
    rep = json.load(open(os.path.join(d, "report.json")))
    assert rep["flux"] == pytest.approx(4 * math.pi, rel=1e-6)
    assert os.path.exists(os.path.join(d, "profile.csv"))


def test_observables_command(tmp_path):
    out = tmp_path / "runs"
    cfg = _cfg(tmp_path, FLAT)
    assert cli.run(["observables", "--config", cfg, "--out", str(out), "--quiet",
                    "--set", "solver.richardson=false"]) == 0
    d = _only_dir(out)
    assert sorted(os.listdir(d)) == ["manifest.json", "report.csv", "report.json"]


def test_inadmissible(tmp_path, capsys):
    cfg = dict(FLAT, G=0.1, points=[[0, 0]] * 3)
    assert cli.run(["solve-planar", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    assert "4*pi*G*N" in capsys.readouterr().err


def test_no_convergence_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "runs"
    code = cli.run(["solve-planar", "--config", _cfg(tmp_path, FLAT), "--out", str(out), "--quiet",
                    "--set", "grid.n=65", "--set", "solver.max_iter=1", "--set", "solver.tol=1e-14",
                    "--set", "G=0.005"])
    assert code == 3
    d = _only_dir(out)
    man = json.load(open(os.path.join(d, "manifest.json")))
    assert man["status"] == "not-converged" and "fields.csv" in man["files"]
    assert "did not converge" in capsys.readouterr().err


def test_io_errors(tmp_path):
    assert cli.run(["solve-planar", "--config", str(tmp_path / "missing.json")]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.run(["solve-planar", "--config", _cfg(tmp_path, FLAT), "--out", str(blocker / "sub")]) == 4


@pytest.mark.parametrize("args", [["--set", "grid.foo=1"], ["--set", "nope"], ["--set", "solver.tol.x=1"]])
def test_bad_overrides(tmp_path, args):
    assert cli.run(["solve-planar", "--config", _cfg(tmp_path, FLAT), "--out", str(tmp_path)] + args) == 2


def test_overrides_last_wins():
    cfg = cli.apply_overrides(FLAT, ["grid.n=129", "grid.n=65", "solver.tol=1e-9", "radial.metric=\"self-consistent\""])
    assert cfg["grid"]["n"] == 65 and cfg["solver"]["tol"] == 1e-9
    assert cfg["radial"]["metric"] == "self-consistent"
    assert FLAT["grid"]["n"] == 257


@pytest.mark.parametrize("key", ["radial.metric=cone", "radial.v_equation=other"])
def test_bad_radial_modes(tmp_path, key):
    assert cli.run(["solve-radial", "--config", _cfg(tmp_path, RADIAL), "--out", str(tmp_path),
                    "--set", key]) == 2


def test_bad_json_and_missing_keys(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert cli.run(["solve-planar", "--config", str(p)]) == 2
    assert cli.run(["solve-planar", "--config", _cfg(tmp_path, {"lambda": 1})]) == 2


def _sweep(tmp_path, spec, cfg=FLAT):
    out = tmp_path / "runs"
    code = cli.run(["sweep", "--config", _cfg(tmp_path, cfg), "--out", str(out), "--quiet",
                    "--sweep", spec])
    with open(os.path.join(_only_dir(out), "sweep.csv")) as fh:
        return code, list(csv.DictReader(fh))


def test_sweep_G_flux_constant(tmp_path):
    code, rows = _sweep(tmp_path, "G=0,0.005,0.01")
    assert code == 0 and [float(r["value"]) for r in rows] == [0, 0.005, 0.01]
    for r in rows:
        assert r["status"] == "ok"
        assert abs(float(r["flux"]) / (2 * math.pi) - 1) < 0.01


def test_sweep_N_energy_linear(tmp_path):
    code, rows = _sweep(tmp_path, "N=1,2,3")
    assert code == 0
    for N, r in zip((1, 2, 3), rows):
        assert abs(float(r["energy"]) / (math.pi * N) - 1) < 0.02


def test_sweep_failures_recorded(tmp_path):
    code, rows = _sweep(tmp_path, "G=0.1,0", dict(FLAT, grid={"R": 10.0, "n": 65}))
    assert code == 0
    assert rows[0]["status"] == "failed" and "4*pi*G*N" in rows[0]["message"]
    assert rows[1]["status"] == "ok"


def test_sweep_empty(tmp_path):
    code, rows = _sweep(tmp_path, "lambda=")
    assert code == 0 and rows == []


@pytest.mark.parametrize("spec", ["mass=1,2", "G", "N=1.5"])
def test_sweep_bad_axis(tmp_path, spec):
    assert cli.run(["sweep", "--config", _cfg(tmp_path, FLAT), "--out", str(tmp_path), "--sweep", spec]) == 2


def test_deterministic_outputs(tmp_path):
    cfg = _cfg(tmp_path, dict(FLAT, G=0.005, grid={"R": 10.0, "n": 129}))
    dirs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert cli.run(["solve-planar", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        dirs.append(_only_dir(out))
    for name in ("fields.csv", "report.json", "report.csv", "telemetry.json"):
        a = open(os.path.join(dirs[0], name), "rb").read()
        b = open(os.path.join(dirs[1], name), "rb").read()
        assert a == b, name


def test_output_dirs_do_not_collide(tmp_path):
    a = cli._output_dir(str(tmp_path), "sweep")
    b = cli._output_dir(str(tmp_path), "sweep")
    assert a != b and os.path.isdir(a) and os.path.isdir(b)


def test_self_test_entry_point():
    exe = shutil.which("curvedvortex")
    assert exe is not None
    res = subprocess.run([exe, "self-test"], capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stdout + res.stderr
    assert "FAIL" not in res.stdout
