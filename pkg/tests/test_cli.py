import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from eraser.cli import main
from eraser.measurement import noiseless_records, standard_tomography_set, write_counts
from eraser.qstate import bell_phi_plus, density, fidelity_pure, read_density, write_matrix
from eraser.spdc import fit_effective_width, rho_from_coherence


def run(*argv):
    return main([str(a) for a in argv])


def load(path):
    return json.loads(path.read_text())


def test_predict_catalogued_filter(tmp_path):
    assert run("predict", "--bandwidth", 1.2, "--out", tmp_path) == 0
    assert load(tmp_path / "report.json")["concurrence"] == pytest.approx(0.99, abs=1e-9)
    assert load(tmp_path / "prediction.json")["coherence"] == pytest.approx(0.99, abs=1e-12)
    read_density(tmp_path / "rho.json")


def test_predict_explicit_width(tmp_path):
    assert run("predict", "--sigma-t", 73.5, "--tau", 100, "--out", tmp_path) == 0
    c = load(tmp_path / "prediction.json")["coherence"]
    assert c == pytest.approx(math.exp(-100 ** 2 / (4 * 73.5 ** 2)), abs=1e-15)
    assert c == pytest.approx(0.63, abs=5e-4)


def test_predict_zero_delay(tmp_path):
    assert run("predict", "--tau", 0, "--sigma-t", 50, "--out", tmp_path) == 0
    assert load(tmp_path / "prediction.json")["coherence"] == 1.0


def test_predict_from_config(tmp_path):
    cfg = tmp_path / "sc.json"
    cfg.write_text(json.dumps({"bandwidth_nm": 8.0, "center_nm": 532.0, "tau_fs": 100.0}))
    assert run("predict", "--config", cfg, "--out", tmp_path) == 0
    assert load(tmp_path / "prediction.json")["coherence"] == pytest.approx(0.63, abs=1e-12)


def test_predict_unknown_scenario(tmp_path, capsys):
    assert run("predict", "--bandwidth", 3.0, "--out", tmp_path) == 2
    assert "3 nm" in capsys.readouterr().err
    assert run("predict", "--out", tmp_path) == 2


def test_simulate_mean_and_determinism(tmp_path):
    write_matrix(tmp_path / "phi.json", density(bell_phi_plus()).entries)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("simulate", "--rho", tmp_path / "phi.json", "--exposure", 1e6, "--seed", 42, "--out", out) == 0
    assert (a / "counts.json").read_bytes() == (b / "counts.json").read_bytes()
    records = load(a / "counts.json")
    assert len(records) == 16
    hh = next(r for r in records if r["alice"] == "H" and r["bob"] == "H")
    assert hh["coincidences"] == pytest.approx(5e5, abs=5 * math.sqrt(5e5))


def test_simulate_usage_errors(tmp_path):
    assert run("simulate", "--bandwidth", 8.0, "--exposure", 0, "--seed", 1, "--out", tmp_path) == 2
    assert run("simulate", "--bandwidth", 8.0, "--exposure", 100, "--out", tmp_path) == 2
    assert run("simulate", "--exposure", 100, "--seed", 1, "--out", tmp_path) == 2


def test_simulate_bad_matrix_file(tmp_path):
    (tmp_path / "bad.json").write_text('{"re": [[1]]}')
    assert run("simulate", "--rho", tmp_path / "bad.json", "--exposure", 10, "--seed", 1, "--out", tmp_path) == 3


def test_reconstruct_noiseless_bell(tmp_path):
    write_counts(tmp_path / "counts.json", noiseless_records(density(bell_phi_plus()), standard_tomography_set(), 1e6))
    assert run("reconstruct", "--counts", tmp_path / "counts.json", "--out", tmp_path) == 0
    rho = read_density(tmp_path / "rho_mle.json")
    assert fidelity_pure(rho, bell_phi_plus()) >= 0.9999
    rep = load(tmp_path / "reconstruction.json")
    for key in ("objective", "iterations", "converged", "min_eigenvalue_raw"):
        assert key in rep


def test_reconstruct_fig4_state(tmp_path):
    write_matrix(tmp_path / "rho.json", rho_from_coherence(0.74).entries)
    assert run("simulate", "--rho", tmp_path / "rho.json", "--exposure", 1e4, "--seed", 3, "--out", tmp_path) == 0
    assert run("reconstruct", "--counts", tmp_path / "counts.json", "--out", tmp_path) == 0
    assert run("analyze", "--rho", tmp_path / "rho_mle.json", "--out", tmp_path) == 0
    assert load(tmp_path / "report.json")["concurrence"] == pytest.approx(0.74, abs=0.05)
    assert isinstance(load(tmp_path / "reconstruction.json")["min_eigenvalue_raw"], float)


@pytest.mark.parametrize("text", ["[]", "{}", "[{\"alice\": \"H\"}]", "garbage"])
def test_reconstruct_malformed_counts(tmp_path, text):
    (tmp_path / "counts.json").write_text(text)
    assert run("reconstruct", "--counts", tmp_path / "counts.json", "--out", tmp_path) == 3


@pytest.mark.parametrize("c, violates", [(0.74, True), (0.21, False)])
def test_analyze_chsh_verdict(tmp_path, c, violates):
    write_matrix(tmp_path / "rho.json", rho_from_coherence(c).entries)
    assert run("analyze", "--rho", tmp_path / "rho.json", "--out", tmp_path) == 0
    rep = load(tmp_path / "report.json")
    assert rep["violates_chsh"] is violates
    assert rep["s_fixed"] == pytest.approx(math.sqrt(2) * (1 + c), abs=1e-9)
    assert rep["s_max"] == pytest.approx(2 * math.sqrt(1 + c * c), abs=1e-9)


def test_analyze_fringes_bell(tmp_path):
    write_matrix(tmp_path / "rho.json", density(bell_phi_plus()).entries)
    assert run("analyze", "--rho", tmp_path / "rho.json", "--out", tmp_path) == 0
    with open(tmp_path / "fringes.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["bob_angle_deg", "rate_alice45", "rate_alice135", "E_alice45", "E_alice135"]
    assert len(rows) == 37
    for row in rows:
        tb = float(row["bob_angle_deg"])
        assert float(row["E_alice45"]) == pytest.approx(math.cos(2 * math.radians(45 - tb)), abs=1e-9)
        assert float(row["E_alice135"]) == pytest.approx(math.cos(2 * math.radians(135 - tb)), abs=1e-9)
        assert float(row["rate_alice45"]) == pytest.approx(0.5 * math.cos(math.radians(45 - tb)) ** 2, abs=1e-9)


def test_analyze_invalid_matrix(tmp_path):
    m = np.diag([0.6, 0.5, 0.0, -0.1])
    write_matrix(tmp_path / "rho.json", m)
    assert run("analyze", "--rho", tmp_path / "rho.json", "--out", tmp_path) == 3
    assert run("analyze", "--rho", tmp_path / "missing.json", "--out", tmp_path) == 3


def test_custom_angles(tmp_path):
    write_matrix(tmp_path / "rho.json", density(bell_phi_plus()).entries)
    assert run("analyze", "--rho", tmp_path / "rho.json", "--angles", "0,45,0,45", "--out", tmp_path) == 0
    assert load(tmp_path / "report.json")["s_fixed"] == pytest.approx(2.0, abs=1e-12)
    assert run("analyze", "--rho", tmp_path / "rho.json", "--angles", "0,45", "--out", tmp_path) == 2


def pipeline(root, *scenario, exposure=1e6, seed=11):
    assert run("predict", *scenario, "--out", root / "predict") == 0
    assert run("simulate", "--rho", root / "predict" / "rho.json", "--exposure", exposure, "--seed", seed,
               "--out", root / "sim") == 0
    assert run("reconstruct", "--counts", root / "sim" / "counts.json", "--out", root / "rec") == 0
    assert run("analyze", "--rho", root / "rec" / "rho_mle.json", "--out", root / "ana") == 0
    return load(root / "ana" / "report.json")


@pytest.mark.parametrize("c", [0.21, 0.63, 0.74, 0.99])
def test_pipeline_recovers_coherence(tmp_path, c):
    sigma = fit_effective_width(c, 100.0)
    rep = pipeline(tmp_path, "--sigma-t", sigma, "--tau", 100)
    assert rep["concurrence"] == pytest.approx(c, abs=0.02)


def test_pipeline_is_byte_deterministic(tmp_path):
    pipeline(tmp_path / "a", "--bandwidth", 8.0, exposure=1e4)
    pipeline(tmp_path / "b", "--bandwidth", 8.0, exposure=1e4)
    for rel in ("predict/rho.json", "predict/report.json", "sim/counts.json", "rec/rho_mle.json",
                "rec/rho_linear.json", "rec/reconstruction.json", "ana/report.json", "ana/fringes.csv"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "eraser.cli", "predict", "--bandwidth", "8.0", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "C = 0.630000" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "eraser.cli", "predict"], capture_output=True, text=True)
    assert proc.returncode == 2
