import json
import math

import numpy as np
import pytest

import condbohm


def test_scenario_state_is_normalized():
    s = condbohm.scenario_state("vortex_oscillator", 64, 64)
    psi = s["psi"]
    assert psi.shape == (64, 64)
    assert psi.dtype == np.complex128
    h1 = s["x1"][1] - s["x1"][0]
    h2 = s["x2"][1] - s["x2"][0]
    w1 = np.full(64, h1)
    w2 = np.full(64, h2)
    w1[[0, -1]] *= 0.5
    w2[[0, -1]] *= 0.5
    norm = np.einsum("i,j,ij->", w1, w2, np.abs(psi) ** 2)
    assert norm == pytest.approx(1.0, rel=1e-10)
    assert s["residual"] < 1e-8
    assert abs(s["energy"] - 2.0) < 0.05


def test_plane_wave_velocity():
    u1, u2 = condbohm.bohmian_velocity("ring_planewave_env", 32, 32, 0.0, 1.0)
    assert u2 == pytest.approx(0.8, rel=1e-12)
    assert abs(u1) < 1e-12


def test_canonical_config_round_trip():
    text = condbohm.canonical_config("[run]\nscenario = frozen_ground\nlambda_sweep = -1,0,0.5,2\n")
    assert "frozen_ground" in text
    assert condbohm.canonical_config(text) == text


def test_config_errors_raise():
    with pytest.raises(condbohm.Error, match="scenaro"):
        condbohm.canonical_config("[run]\nscenaro = vortex_oscillator\n")


def test_classicality_report():
    report = condbohm.run(
        "classicality",
        "[run]\nscenario = ring_planewave_env\nt_final = 0.5\n[grid]\nn1 = 64\nn2 = 64\n",
    )
    bohmian = report["models"][0]
    assert bohmian["model"] == "bohmian"
    assert bohmian["classical"]
    assert bohmian["v2_spread"] < 1e-8
    assert math.isclose(bohmian["ratio"], 2 * math.pi * 8, rel_tol=1e-6)


def test_cli_writes_manifest(tmp_path):
    config = tmp_path / "res.ini"
    config.write_text("[run]\nscenario = vortex_oscillator\nt_final = 0.3\n[grid]\nn1 = 48\nn2 = 48\n")
    out = tmp_path / "out"
    assert condbohm.cli(["residuals", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert {f["path"] for f in manifest["files"]} == {"residuals.json", "residuals.csv"}
    assert condbohm.cli(["residuals", "--config", str(tmp_path / "missing.ini")]) == 2
