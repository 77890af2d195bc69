import csv
import json

import numpy as np
import pytest

from rabi_dpt import cli

GC = float(np.sqrt(1.04))


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema=rabi-dpt/v1"
    header = json.loads(lines[1][2:])
    rows = list(csv.DictReader(lines[2:]))
    return header, rows


def test_analytic_table(tmp_path):
    code, out = run(tmp_path, "analytic-table", "--g", f"0,1.01,{GC!r}")
    assert code == 0
    header, rows = read_csv(out)
    assert header["config"]["command"] == "analytic-table" and header["version"]
    r0, r1, rc = rows
    assert float(r0["population"]) == 0 and float(r0["purity"]) == 1 and float(r0["max_variance"]) == 1
    assert float(r1["adr"]) == pytest.approx(0.0582, abs=1e-4)
    assert float(rc["adr"]) == 0 and rc["population"] == "" and rc["pole"] == "1"


def test_analytic_table_range_checked(tmp_path):
    assert run(tmp_path, "analytic-table", "--g", "1.2")[0] == 1
    assert run(tmp_path, "analytic-table", "--g-range", "0:1")[0] == 1


def test_usage_errors():
    assert cli.main(["bogus"]) == 1
    assert cli.main(["steady-sweep", "--g", "1.0"]) == 1
    assert cli.main(["steady-sweep", "--model", "dicke", "--n-spins", "24", "--g", "1.0"]) == 1


def test_output_is_deterministic(tmp_path):
    args = ["steady-sweep", "--eta", "10,20", "--g", "0.9,1.1", "--cutoff", "24"]
    c1, o1 = run(tmp_path, *args, "--jobs", "1", name="a.csv")
    c2, o2 = run(tmp_path, *args, "--jobs", "2", name="b.csv")
    assert c1 == c2 == 0
    assert o1.read_bytes() == o2.read_bytes()
    _, rows = read_csv(o1)
    assert [(r["size"], r["g"]) for r in rows] == [("10", "0.9"), ("10", "1.1"), ("20", "0.9"), ("20", "1.1")]
    mantissas = [r["value"].split("e")[0].replace("-", "").replace(".", "").lstrip("0") for r in rows]
    assert all(len(m) <= 12 for m in mantissas) and any(len(m) == 12 for m in mantissas)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nkappa_ratio = 0.5\ng = 0.3\n")
    code, out = run(tmp_path, "analytic-table", "--config", str(cfg), "--g", "0.4")
    assert code == 0
    header, rows = read_csv(out)
    assert header["config"]["kappa_ratio"] == 0.5
    assert [r["g"] for r in rows] == ["0.4"]
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert run(tmp_path, "analytic-table", "--config", str(bad))[0] == 1


def test_scaling_collapse_on_synthetic_input(tmp_path):
    sweep_csv = tmp_path / "sweep.csv"
    rows = []
    for s in (30, 50, 80):
        for d in np.logspace(-3, -1, 6):
            for sign in (-1, 1):
                rows.append({"model": "qrm", "size": s, "g": GC + sign * d, "value": 2 * (s * d**2) ** 0.3 / d,
                             "error": ""})
    cli.write_csv({"command": "steady-sweep"}, ["model", "size", "g", "value", "error"], rows,
                  stream=open(sweep_csv, "w"))
    code, out = run(tmp_path, "scaling-collapse", "--input", str(sweep_csv))
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["collapse"]["input"]["dispersion"] < 1e-10


def test_steady_sweep_scaling(tmp_path):
    code, out = run(tmp_path, "steady-sweep", "--eta", "20,40,60,80,100", "--g", repr(GC))
    assert code == 0
    _, rows = read_csv(out)
    slope = np.polyfit(np.log([float(r["size"]) for r in rows]), np.log([float(r["value"]) for r in rows]), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.05)


def test_ion_plan(tmp_path):
    code, out = run(tmp_path, "ion-plan", "--eta", "50", "--kappa-ratio", "0.2", name="plan.json")
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["lambda_c_hz"] == pytest.approx(1800, abs=10)
    assert rep["g"] == pytest.approx(rep["g_c"])


def test_spectrum_and_semiclassical(tmp_path):
    code, out = run(tmp_path, "spectrum", "--model", "effective", "--g", "0.5", "--cutoff", "40", "--k", "3")
    assert code == 0
    _, rows = read_csv(out)
    assert float(rows[0]["adr"]) == pytest.approx(0.2, abs=1e-8)
    code, out = run(tmp_path, "semiclassical", "--eta", "1", "--g", "1.2", "--T", "1000", "--n-out", "3")
    assert code == 0
    header, rows = read_csv(out)
    stable = [fp for fp in header["config"]["fixed_points"] if fp["stability"] == "stable"]
    assert min(abs(float(rows[-1]["re_alpha"]) - fp["alpha"][0]) for fp in stable) < 1e-6


def test_spectrum_needs_cutoff(tmp_path):
    assert run(tmp_path, "spectrum", "--g", "0.5")[0] == 1
