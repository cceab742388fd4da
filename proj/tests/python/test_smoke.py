import math

import numpy as np
import pytest

import qpair


def test_presets():
    names = qpair.preset_names()
    assert "fig4-calibrated" in names and "optical" in names
    p = qpair.preset("optical")
    assert p.gamma == pytest.approx(0.08)
    assert p.kappa[0] == pytest.approx(0.053)
    with pytest.raises(ValueError):
        qpair.preset("nope")


def test_coherent_transfer():
    p = qpair.preset("fig4-calibrated")
    pops = qpair.coherent_populations(p, dt=1e-3, stride=10)
    assert pops.shape[1] == 6
    assert pops[0, 1] == pytest.approx(1.0)  # starts in the two-photon state
    assert pops[-1, 4] >= 0.999  # ends in the entangled pair state
    # population never leaks outside the five landmark states here
    assert np.all(pops[:, 1:].sum(axis=1) <= 1 + 1e-9)


def test_pulse_calibration():
    p = qpair.preset("fig4")
    q = qpair.calibrate_pulse(p, 1, mode="amplitude")
    assert qpair.pulse_area(q, 1) == pytest.approx(math.pi, abs=1e-9)
    with pytest.raises(qpair.CalibrationError):
        qpair.calibrate_pulse(p, 1, mode="width")


def test_analytic_solutions():
    amp_b, amp_i = qpair.analytic_cavity1(0.0, 1.0, 0.5)
    assert amp_b == pytest.approx(0.0)
    assert amp_i == pytest.approx(1.0)
    amp_e, _ = qpair.analytic_cavity2(math.pi / 2, 1.0, 0.0)
    assert abs(amp_e) == pytest.approx(1.0)


def test_chsh():
    assert qpair.chsh_fixed(qpair.rho_model(1.0)) == pytest.approx(2 * math.sqrt(2))
    assert qpair.chsh_fixed(qpair.rho_model(0.0)) == pytest.approx(math.sqrt(2))
    assert qpair.chsh_optimal(qpair.rho_model(0.0)) == pytest.approx(2.0)
    assert qpair.fidelity_model(0.82) == pytest.approx(0.91)


def test_ensemble_closed_system():
    p = qpair.preset("fig4-calibrated")
    stats = qpair.run_ensemble(p, 40, seed=1)
    merit = qpair.merit_figures(stats)
    assert merit["P"] >= 0.999
    assert merit["p2ph"] >= 0.999
    assert merit["S_fixed"] == pytest.approx(2 * math.sqrt(2), abs=1e-2)
    events = qpair.classify_events(stats)
    assert events["two_diff_entangled"] >= 0.999


def test_ensemble_determinism():
    p = qpair.preset("fig6a")
    a = qpair.run_ensemble(p, 200, seed=9, workers=1)
    b = qpair.run_ensemble(p, 200, seed=9, workers=4)
    assert a.click_counts == b.click_counts
    assert np.array_equal(a.mean_exit_populations, b.mean_exit_populations)
    assert a.norm_violations == 0


def test_oracle_agreement():
    p = qpair.preset("fig6a")
    stats = qpair.run_ensemble(p, 2000, seed=3, leak_out=False)
    mcwf = stats.mean_exit_populations
    oracle = qpair.oracle_populations(p)
    assert oracle.sum() == pytest.approx(1.0, abs=1e-8)
    n = stats.n
    se = np.sqrt(np.maximum(oracle * (1 - oracle), 1e-12) / n)
    assert np.all(np.abs(mcwf - oracle) < 4 * se + 1e-3)
    assert len(qpair.basis_labels()) == len(oracle) == 15
