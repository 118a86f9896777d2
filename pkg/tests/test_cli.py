from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from absorbing_flows.cli import main, parse_eigenvalues, time_grid
from absorbing_flows.errors import FlowError
from absorbing_flows.generator import generator_to_json, make_generator
from absorbing_flows.states import make_state


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    assert main(["build", "--eigenvalues", "0.667,0.333", "--index", "3", "--out", str(path)]) == 0
    return path


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_build_summary(model_file, capsys):
    obj = json.loads(model_file.read_text())
    assert obj["index"] == 3 and obj["certificate"]["pure"]
    main(["build", "--eigenvalues", "0.667,0.333", "--index", "3"])
    out = capsys.readouterr().out
    assert "pure              true" in out and "index             3" in out


def test_build_tracial(capsys):
    assert main(["build", "--eigenvalues", "0.5,0.5", "--index", "1"]) == 0
    assert "Tracial" in capsys.readouterr().out


def test_build_validation(capsys):
    assert main(["build", "--eigenvalues", "0.7,0.2", "--index", "1"]) == 2
    assert "eigenvalues must sum to 1" in capsys.readouterr().err
    assert main(["build", "--eigenvalues", "0.5,0.5", "--index", "4"]) == 2
    assert main(["build", "--eigenvalues", "0.3,0.7", "--index", "1"]) == 2
    assert main(["build", "--eigenvalues", "a,b", "--index", "1"]) == 2


def test_parse_eigenvalues_renormalizes_only_tiny_drift():
    vals = parse_eigenvalues("0.6,0.4000000001")
    assert math.fsum(vals) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(FlowError):
        parse_eigenvalues("0.6,0.41")


def test_verify_build_output(model_file, capsys):
    assert main(["verify", "--model", str(model_file)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] and report["unital_defect"] <= 1e-9 and report["invariance_defect"] <= 1e-9


def test_verify_unbalanced(tmp_path, capsys):
    v = np.array([[0, 1], [0, 0]], dtype=complex)
    gen = make_generator([v], -0.5 * v.conj().T @ v)
    path = tmp_path / "unbalanced.json"
    path.write_text(json.dumps(generator_to_json(gen, make_state([0.5, 0.5]))))
    assert main(["verify", "--model", str(path)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["criterion_38"] is False and not report["ok"]


def test_verify_schema_errors(model_file, tmp_path):
    truncated = tmp_path / "truncated.json"
    truncated.write_text(model_file.read_text()[:100])
    assert main(["verify", "--model", str(truncated)]) == 3
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"r": 2, "kraus": []}))
    assert main(["verify", "--model", str(wrong)]) == 3
    assert main(["verify", "--model", str(tmp_path / "missing.json")]) == 3


def test_evolve_depolarizing_closed_form(tmp_path):
    out = tmp_path / "d.csv"
    code = main(["evolve", "--model", "preset:depolarizing", "--rho0", "pure-0", "--tmax", "20", "--out", str(out)])
    assert code == 0
    rows = _rows(out)
    t = np.array([float(r["t"]) for r in rows])
    d = np.array([float(r["trace_distance"]) for r in rows])
    assert t[0] == 0 and len(rows) == 65
    np.testing.assert_allclose(d, np.exp(-t) * d[0], atol=1e-8)


def test_evolve_own_state(model_file, tmp_path):
    out = tmp_path / "omega.csv"
    assert main(["evolve", "--model", str(model_file), "--rho0", "omega", "--out", str(out)]) == 0
    assert max(float(r["trace_distance"]) for r in _rows(out)) <= 1e-10


def test_evolve_decays_and_is_deterministic(model_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["evolve", "--model", str(model_file), "--rho0", "pure-1", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert float(_rows(a)[-1]["trace_distance"]) <= 1e-6


def test_evolve_linear_grid_and_explicit_matrix(model_file, tmp_path):
    out = tmp_path / "lin.csv"
    rho = json.dumps([[[0.5, 0], [0, 0.2]], [[0, -0.2], [0.5, 0]]])
    code = main(
        ["evolve", "--model", str(model_file), "--rho0", rho, "--tmax", "80", "--steps", "5", "--no-log-grid", "--out", str(out)]
    )
    assert code == 0
    assert [float(r["t"]) for r in _rows(out)] == [0.0, 20.0, 40.0, 60.0, 80.0]


def test_evolve_non_pure(tmp_path, capsys):
    code = main(["evolve", "--model", "preset:dephasing", "--rho0", "pure-0", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "no decay detected" in capsys.readouterr().err


def test_evolve_bad_density(model_file):
    assert main(["evolve", "--model", str(model_file), "--rho0", "pure-5"]) == 2
    assert main(["evolve", "--model", str(model_file), "--rho0", "[[[2,0],[0,0]],[[0,0],[-1,0]]]"]) == 2
    assert main(["evolve", "--model", str(model_file), "--steps", "1"]) == 2


def test_evolve_random_seed_env(model_file, tmp_path, monkeypatch):
    monkeypatch.setenv("ABSORBING_FLOWS_SEED", "11")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["evolve", "--model", str(model_file), "--rho0", "random", "--out", str(a)])
    main(["evolve", "--model", str(model_file), "--rho0", "random", "--seed", "11", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("ABSORBING_FLOWS_SEED", "nope")
    assert main(["evolve", "--model", str(model_file), "--rho0", "random"]) == 2


def test_gap(model_file, capsys):
    assert main(["gap", "--model", str(model_file), "--m-max", "32"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["epsilon"] > 0 and out["m_max"] == 32
    assert main(["gap", "--model", "preset:dephasing"]) == 1


def test_demo_perturbation(tmp_path, capsys):
    out = tmp_path / "demo.json"
    assert main(["demo-perturbation", "--eigenvalues", "0.6666666666666666,0.3333333333333333", "--epsilon", "0.1", "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["defect_before"] == pytest.approx(0.2, abs=1e-10) and obj["defect_after"] <= 1e-9
    assert main(["demo-perturbation", "--eigenvalues", "0.5,0.5"]) == 2
    assert main(["demo-perturbation", "--epsilon", "0.5"]) == 2


@pytest.mark.parametrize("r_max, rows", [(2, 6), (3, 22)])
def test_sweep(tmp_path, r_max, rows):
    assert main(["sweep", "--r-max", str(r_max), "--out", str(tmp_path)]) == 0
    table = _rows(tmp_path / "sweep.csv")
    assert len(table) == rows
    assert all(r["pure"] == "true" and r["status"] == "ok" for r in table)
    assert list(table[0]) == ["r", "n", "branch", "pure", "index", "gap", "max_defect", "status"]


def test_sweep_cap(tmp_path):
    assert main(["sweep", "--r-max", "6", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--r-max", "1", "--out", str(tmp_path)]) == 2


def test_time_grid():
    g = time_grid(100.0, 64, True)
    assert g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(100.0) and len(g) == 64
    with pytest.raises(FlowError):
        time_grid(-1.0, 10, True)


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "absorbing_flows", "build", "--eigenvalues", "0.5,0.3,0.2", "--index", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and "pure              true" in proc.stdout
