"""End-to-end CLI behavior through in-process main() calls."""

import csv
import json
import math

import numpy as np
import pytest

from diracpulse import cli
from diracpulse.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from diracpulse.dirac import sommerfeld_energy
from diracpulse.scaling import scaled_charge

NR_TEXT = """
theory = schrodinger
z = 1
photon_energy_au = 0.9
field_au = 0.05
l_max = 1
basis_n = 30
basis_k = 5
r_max = 25
basis_n_geom = 8
basis_g = 1.3
cycles = 2
rtol = 1e-6
atol = 1e-10
"""

DIRAC_TEXT = """
theory = dirac
z = 50
photon_energy_au = 500
intensity_wcm2 = 5e22
gauge = velocity
j_max = 1.5
basis_n = 40
basis_k = 5
basis_n_geom = 12
basis_g = 1.25
cycles = 2
rtol = 1e-6
atol = 1e-10
"""

SWEEP_TEXT = """
sweep_axis = z
sweep_values = 1, 2, 3
theory = schrodinger
z = 1
photon_energy_au = 0.9
field_au = 0.05
l_max = 1
basis_n = 30
basis_k = 5
r_max = 6
basis_n_geom = 8
basis_g = 1.3
cycles = 2
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_eigen_writes_csv_json_png(tmp_path, capsys):
    cfg = _write(tmp_path, "run.cfg", DIRAC_TEXT)
    base = tmp_path / "out" / "spec"
    assert main(["eigen", str(cfg), "-o", str(base)]) == EXIT_OK
    summary = json.loads((base.with_suffix(".json")).read_text())
    assert summary["spurious_excluded"] == 2
    exact = sommerfeld_energy(50.0, 1, -1)
    assert math.isclose(summary["ground_energy_au"], exact, rel_tol=1e-3)
    with open(base.with_suffix(".csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == summary["states_emitted"]
    assert {r["channel"] for r in rows} == {"s1/2", "p1/2", "p3/2", "d3/2"}
    assert base.with_suffix(".png").exists()
    assert "spurious excluded" in capsys.readouterr().out


def test_eigen_no_figure(tmp_path):
    cfg = _write(tmp_path, "run.cfg", NR_TEXT)
    base = tmp_path / "spec"
    assert main(["eigen", str(cfg), "-o", str(base), "--no-figure"]) == EXIT_OK
    assert base.with_suffix(".csv").exists()
    assert not base.with_suffix(".png").exists()


def test_propagate_writes_report(tmp_path, capsys):
    cfg = _write(tmp_path, "run.cfg", NR_TEXT)
    base = tmp_path / "run"
    assert main(["propagate", str(cfg), "-o", str(base)]) == EXIT_OK
    payload = json.loads(base.with_suffix(".json").read_text())
    assert payload["kind"] == "propagation"
    for key in ("ionization", "survival", "bound_excitation",
                "negative_energy", "norm", "per_channel", "stats",
                "checkpoints", "manifest"):
        assert key in payload
    assert 0.0 < payload["ionization"] < 1.0
    assert math.isclose(payload["norm"], 1.0, rel_tol=1e-5)
    assert payload["manifest"]["config_hash"]
    with open(base.with_suffix(".csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["channel"] for r in rows] == ["l=0", "l=1"]
    for r in rows:
        parts = (float(r["negative_energy"]) + float(r["bound"])
                 + float(r["positive_continuum"]))
        assert math.isclose(parts, float(r["total"]), rel_tol=1e-12)
    assert base.with_suffix(".png").exists()
    assert "yield" in capsys.readouterr().out


def test_propagate_coupling_cache_round_trip(tmp_path):
    cfg = _write(tmp_path, "run.cfg", DIRAC_TEXT)
    cache = tmp_path / "cache"
    base1, base2 = tmp_path / "a", tmp_path / "b"
    assert main(["propagate", str(cfg), "-o", str(base1), "--no-figure",
                 "--cache-dir", str(cache)]) == EXIT_OK
    caches = list(cache.glob("coupling_*.npz"))
    assert len(caches) == 1
    stamp = caches[0].stat().st_mtime_ns
    assert main(["propagate", str(cfg), "-o", str(base2), "--no-figure",
                 "--cache-dir", str(cache)]) == EXIT_OK
    assert caches[0].stat().st_mtime_ns == stamp  # reused, not rebuilt
    a = json.loads(base1.with_suffix(".json").read_text())
    b = json.loads(base2.with_suffix(".json").read_text())
    assert a["ionization"] == b["ionization"]
    assert a["per_channel"] == b["per_channel"]


def test_sweep_runs_resumes_and_recomputes(tmp_path, capsys):
    cfg = _write(tmp_path, "sweep.cfg", SWEEP_TEXT)
    base = tmp_path / "sweep"
    csv_path = base.with_suffix(".csv")
    assert main(["sweep", str(cfg), "-o", str(base)]) == EXIT_OK
    first = csv_path.read_text()
    assert len(first.splitlines()) == 4
    assert base.with_suffix(".png").exists()
    assert "0 failed" in capsys.readouterr().out

    # resume path touches no point, so the file comes back byte-identical
    assert main(["sweep", str(cfg), "-o", str(base), "--no-figure"]) == EXIT_OK
    assert csv_path.read_text() == first

    # recomputation reproduces the physics columns exactly
    assert main(["sweep", str(cfg), "-o", str(base), "--no-figure",
                 "--no-resume"]) == EXIT_OK
    with open(csv_path) as fh:
        redo = list(csv.DictReader(fh))
    with open(tmp_path / "first.csv", "w") as fh:
        fh.write(first)
    with open(tmp_path / "first.csv") as fh:
        orig = list(csv.DictReader(fh))
    for r1, r2 in zip(orig, redo):
        assert r1["config_hash"] == r2["config_hash"]
        assert r1["ionization"] == r2["ionization"]
        assert r1["n_steps"] == r2["n_steps"]


def test_sweep_parallel_matches_serial(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "sweep.cfg", SWEEP_TEXT)
    serial, par = tmp_path / "serial", tmp_path / "par"
    assert main(["sweep", str(cfg), "-o", str(serial), "--no-figure"]) == EXIT_OK
    monkeypatch.setenv("DIRACPULSE_THREADS", "2")
    assert main(["sweep", str(cfg), "-o", str(par), "--no-figure"]) == EXIT_OK
    with open(serial.with_suffix(".csv")) as fh:
        s_rows = list(csv.DictReader(fh))
    with open(par.with_suffix(".csv")) as fh:
        p_rows = list(csv.DictReader(fh))
    assert [r["value"] for r in p_rows] == [r["value"] for r in s_rows]
    for rs, rp in zip(s_rows, p_rows):
        assert rs["ionization"] == rp["ionization"]


def test_sweep_bad_config_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path, "sweep.cfg", SWEEP_TEXT.replace("sweep_axis = z", ""))
    rc = main(["sweep", str(cfg), "-o", str(tmp_path / "x")])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["eigen", str(tmp_path / "nope.cfg"), "-o", str(tmp_path / "x")])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_output_path_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path, "run.cfg", NR_TEXT)
    rc = main(["eigen", str(cfg)])
    assert rc == EXIT_CONFIG
    assert "no output path" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys, monkeypatch):
    def diverge(cfg, coupling=None):
        raise RuntimeError("step limit reached")

    monkeypatch.setattr(cli, "run_once", diverge)
    cfg = _write(tmp_path, "run.cfg", NR_TEXT)
    rc = main(["propagate", str(cfg), "-o", str(tmp_path / "x")])
    assert rc == EXIT_NUMERICAL
    assert "numerical failure: step limit reached" in capsys.readouterr().err


def test_scale_prints_relations(capsys):
    rc = main(["scale", "--z", "50", "--photon-energy-au", "500",
               "--intensity-wcm2", "5e23"])
    assert rc == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert math.isclose(payload["z_prime"], scaled_charge(50.0), rel_tol=1e-15)
    assert math.isclose(payload["z_prime"], 50.8847, abs_tol=5e-5)
    assert payload["ip_rel_au"] > payload["ip_nonrel_au"] == 1250.0
    assert math.isclose(payload["delta_ip_au"],
                        payload["ip_rel_au"] - payload["ip_nonrel_au"],
                        rel_tol=1e-9)
    assert math.isclose(payload["keldysh_gamma"],
                        50.0 * 500.0 / payload["base"]["field_au"],
                        rel_tol=1e-12)
    # pulse block follows the nonrelativistic trajectory omega ~ Z^2, F0 ~ Z^3
    u = 50.0 / payload["base"]["z"]
    assert payload["scaled"]["z"] == 50.0
    assert math.isclose(payload["scaled"]["photon_energy_au"],
                        500.0 * u**2, rel_tol=1e-12)
    assert math.isclose(payload["scaled"]["field_au"],
                        payload["base"]["field_au"] * u**3, rel_tol=1e-12)


def test_scale_exclusive_arguments(capsys):
    rc = main(["scale", "--z", "50", "--photon-energy-au", "500",
               "--wavelength-nm", "0.09"])
    assert rc == EXIT_CONFIG
    assert "either" in capsys.readouterr().err


def test_scale_rate_table_transform(tmp_path, capsys):
    f0 = np.linspace(0.06, 0.12, 5)
    gamma = np.exp(-2.0 / (3.0 * f0))
    table = tmp_path / "rates.csv"
    with open(table, "w") as fh:
        fh.write("f0_z3au,gamma_z2au\n")
        for f, g in zip(f0, gamma):
            fh.write(f"{f:.17g},{g:.17g}\n")
    out = tmp_path / "scaled_rates.csv"
    rc = main(["scale", "--z", "54", "--rate-table", str(table),
               "--rate-output", str(out)])
    assert rc == EXIT_OK
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    u = scaled_charge(54.0) / 54.0
    np.testing.assert_allclose(data[:, 0], f0 * u**3, rtol=1e-15)
    np.testing.assert_allclose(data[:, 1], gamma * u**2, rtol=1e-15)
    payload = json.loads(capsys.readouterr().out)
    assert payload["rate_output"] == str(out)


def test_scale_rate_table_needs_destination(tmp_path, capsys):
    table = tmp_path / "rates.csv"
    table.write_text("f0_z3au,gamma_z2au\n0.1,1e-3\n0.2,1e-2\n")
    rc = main(["scale", "--z", "54", "--rate-table", str(table)])
    assert rc == EXIT_CONFIG
    assert "rate-output" in capsys.readouterr().err


def test_validate_degraded_basis_fails(tmp_path, capsys):
    base = tmp_path / "report"
    rc = main(["validate", "--basis-n", "60", "-o", str(base)])
    assert rc == EXIT_VALIDATION
    out = capsys.readouterr().out
    assert "[FAIL] dirac_eigen_golden" in out
    assert "basis too small" in out
    assert "validation FAILED" in out
    report = json.loads(base.with_suffix(".json").read_text())
    assert report["passed"] is False
    assert report["basis"]["n"] == 60


def test_validate_detects_mutated_coupling(capsys):
    rc = main(["validate", "--basis-n", "60", "--mutate", "velocity-sign"])
    assert rc == EXIT_VALIDATION
    assert "[FAIL] gauge_identity_dirac" in capsys.readouterr().out


@pytest.mark.slow
def test_validate_full_suite_passes(capsys):
    rc = main(["validate"])
    out = capsys.readouterr().out
    assert rc == EXIT_OK, out
    assert "validation PASSED" in out
    for name in ("dirac_eigen_golden", "schrodinger_eigen_golden",
                 "gauge_identity_dirac", "gauge_identity_schrodinger",
                 "trk_sum", "ne_closure", "hermiticity", "pulse_consistency",
                 "rabi_oracle", "partition_identity"):
        assert f"[PASS] {name}" in out
