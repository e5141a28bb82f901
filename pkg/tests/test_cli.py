import json
import math

import numpy as np
import pytest

from atmos.cli import main


def test_equilibrium_csv(tmp_path):
    out = tmp_path / "eq.csv"
    rc = main(["equilibrium", "--gamma", "1.5", "--R", "2", "--samples",
               "40", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# gamma=1.5")
    assert "M=" in lines[0]
    assert lines[1] == "r,z,xi,x,rho_bar,P_bar"
    first = [float(v) for v in lines[2].split(",")]
    assert first[0] == 1.0 and first[1] == 0.5
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 2.0 and last[4] == 0.0    # vacuum boundary row


def test_operator_dump(tmp_path):
    out = tmp_path / "op.csv"
    rc = main(["operator-dump", "--gamma", "1.5", "--R", "2", "--n", "64",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,L1,L0,weight"
    assert len(lines) == 65
    row0 = [float(v) for v in lines[1].split(",")]
    assert row0[0] == 0.0
    assert row0[1] == pytest.approx((14 - 12) / (3 * 8))   # L1(0), N=6, R=2


def test_oracle_bessel_zeros(capsys):
    rc = main(["oracle", "bessel-zeros", "--nu", "0.5", "--count", "3"])
    assert rc == 0
    outlines = capsys.readouterr().out.strip().splitlines()
    for n, line in enumerate(outlines, start=1):
        idx, val = line.split()
        assert int(idx) == n
        assert float(val) == pytest.approx(n * math.pi, abs=1e-10)


def test_spectrum_both_methods(tmp_path):
    out = tmp_path / "spec.csv"
    rc = main(["spectrum", "--gamma", "1.5", "--R", "2", "--nmodes", "2",
               "--n", "512", "--method", "both", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,lambda,phi0,zeros,method_delta"
    row = lines[1].split(",")
    assert float(row[1]) == pytest.approx(2.0, rel=1e-6)
    assert int(row[3]) == 0
    assert float(row[4]) < 1e-6


def test_simulate_outputs(tmp_path):
    prefix = str(tmp_path / "run")
    rc = main(["simulate", "--gamma", "1.5", "--R", "2", "--mode", "1",
               "--eps", "1e-3", "--T", "10.0", "--n", "128",
               "--out", prefix])
    assert rc == 0
    series = (tmp_path / "run_series.csv").read_text().splitlines()
    assert series[0] == "t,y_boundary,R_F,E"
    snaps = (tmp_path / "run_snapshots.csv").read_text().splitlines()
    assert snaps[0] == "t,x,y,yt"
    euler = (tmp_path / "run_euler.csv").read_text().splitlines()
    assert euler[0] == "t,r,rho,u"
    rep = json.loads((tmp_path / "run_report.json").read_text())
    for key in ("measured_period", "vacuum_exponent_fit", "sup_w",
                "admissibility_margin"):
        assert key in rep
    assert rep["measured_period"] == pytest.approx(
        2 * math.pi / math.sqrt(rep["lambda_mode"]), rel=0.01)


def test_sweep_cli(tmp_path):
    rc = main(["sweep", "--gamma", "1.5", "--R", "2",
               "--eps", "2e-3,1e-3", "--grids", "32,64", "--outdir",
               str(tmp_path), "--plots"])
    assert rc == 0
    rep = json.loads((tmp_path / "epsilon-sweep.json").read_text())
    assert rep["passed"] is True
    assert (tmp_path / "sweep.svg").exists()


def test_selftest_cli():
    assert main(["selftest", "nonlinearity"]) == 0
    assert main(["selftest"]) == 0
