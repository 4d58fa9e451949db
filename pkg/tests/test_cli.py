import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from lpvi import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

ELECTRON = """
[system]
name = electron
h = 0.02
N = 20
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_simulate_writes_csv_and_report(tmp_path):
    cfg = _write(tmp_path, ELECTRON)
    out = tmp_path / "traj.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert ",".join(rows[0]) == ("n,t,p_1,p_2,p_3,omega_1,lambda_1,residual,newton_iters,cond_estimate")
    assert len(rows) == 21
    first = rows[1]
    assert first[0] == "2" and float(first[1]) == pytest.approx(0.04)
    assert first[5] == "1"  # charge ratio e/c, written exactly
    report = json.loads((tmp_path / "traj.csv.report.json").read_text())
    assert report["steps_completed"] == 20 and report["monitors"]["charge"] == 0.0
    assert not list(tmp_path.glob(".lpvi-*"))


def test_csv_precision_round_trips(tmp_path):
    cfg = _write(tmp_path, ELECTRON)
    out = tmp_path / "traj.csv"
    cli.main(["simulate", "--config", cfg, "--out", str(out)])
    from conftest import electron_run
    traj = electron_run(0.02, 20)
    rows = list(csv.DictReader(out.open()))
    assert float(rows[3]["p_1"]) == traj.shape_points[5][0]


@pytest.mark.parametrize("name", ["electron", "beanie-first-order", "beanie-optimal-control"])
def test_shipped_configs_simulate(name, tmp_path):
    out = tmp_path / "o.csv"
    assert cli.main(["simulate", "--config", str(CONFIGS / f"{name}.ini"), "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header.startswith("n,t,p_1,")


@pytest.mark.parametrize("text,needle", [
    (ELECTRON + "bogus = 1\n", "system.bogus: unknown key"),
    (ELECTRON + "[extras]\na = 1\n", "unknown section"),
    (ELECTRON.replace("h = 0.02", "h = 0"), "system.h"),
    (ELECTRON.replace("N = 20", "N = many"), "system.N"),
    ("[system]\nname = pendulum\nh = 0.1\nN = 3\n", "unknown system"),
    ("[system]\nname = electron\nN = 3\n", "system.h: required"),
    (ELECTRON + "[params]\nmass = -1\n", "mass"),
])
def test_config_errors_exit_1(tmp_path, capsys, text, needle):
    cfg = _write(tmp_path, text)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    assert needle in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_missing_config_and_bad_args(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "nope.ini")]) == 1
    assert cli.main(["simulate"]) == 1
    assert cli.main(["frobnicate"]) == 1


def test_step_failure_exit_2(tmp_path, capsys):
    text = "[system]\nname = beanie-optimal-control\nh = 10\nN = 5\n[newton]\nmax_iterations = 5\n"
    cfg = _write(tmp_path, text)
    out = tmp_path / "f.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 2
    assert "failed" in capsys.readouterr().err
    report = json.loads((tmp_path / "f.csv.report.json").read_text())
    assert report["failed"] and report["failure_step"] >= 1


def test_converge_needs_two_steps(tmp_path):
    cfg = _write(tmp_path, ELECTRON)
    assert cli.main(["converge", "--config", cfg, "--h-list", "0.01"]) == 1


def test_converge_band_exit_codes(tmp_path):
    text = "[system]\nname = beanie-first-order\nh = 0.02\nN = 10\n[converge]\nT = 0.4\n"
    cfg = _write(tmp_path, text)
    out = tmp_path / "c.json"
    # the first-order beanie flow converges at second order in psi
    code = cli.main(["converge", "--config", cfg, "--h-list", "0.04,0.02,0.01", "--out", str(out)])
    rep = json.loads(out.read_text())
    assert code == 3 and not rep["in_band"]
    assert 1.8 <= rep["fitted_order"] <= 2.2
    wide = cfg.replace("run.ini", "wide.ini")
    Path(wide).write_text(text + "band_low = 1.8\nband_high = 2.2\n")
    assert cli.main(["converge", "--config", wide, "--h-list", "0.04,0.02,0.01", "--out", str(out)]) == 0


def test_check_with_kkt(tmp_path, capsys):
    text = "[system]\nname = electron\nh = 0.1\nN = 6\n[check]\nwindows = 5\n"
    cfg = _write(tmp_path, text)
    assert cli.main(["check", "--config", cfg, "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["kkt"]["pass"] and res["kkt"]["marching_residual"] <= 1e-8
    assert set(res) == {"derivatives", "regularity", "monitors", "kkt"}


def test_check_skips_kkt_for_long_runs(tmp_path, capsys):
    text = "[system]\nname = beanie-first-order\nh = 0.05\nN = 40\n[check]\nwindows = 5\n"
    cfg = _write(tmp_path, text)
    assert cli.main(["check", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "kkt: skipped" in out and "charge: not applicable" in out


def test_list_systems(capsys):
    assert cli.main(["list-systems", "--json"]) == 0
    listing = json.loads(capsys.readouterr().out)
    assert [x["name"] for x in listing] == ["electron", "beanie-first-order", "beanie-optimal-control"]
    assert listing[0]["required"] == ["system.name", "system.h", "system.N"]


def test_atomic_write_keeps_old_file_on_error(tmp_path, monkeypatch):
    target = tmp_path / "keep.txt"
    target.write_text("old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        cli.atomic_write(str(target), "new")
    assert target.read_text() == "old"
    assert not list(tmp_path.glob(".lpvi-*"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lpvi", "list-systems"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and "beanie-optimal-control" in proc.stdout
