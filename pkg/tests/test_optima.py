import math

import numpy as np
import pytest
from scipy.special import lambertw

from eitfisher import optima
from eitfisher.fisher import fi_classical, fi_quantum
from eitfisher.lineshape import MediumParams
from eitfisher.optima import NoFiniteOptimum
from eitfisher.photonstat import ProbeSpec

E = math.e


# --- Lambert W ---------------------------------------------------------------

def test_lambert_matches_scipy():
    x = np.concatenate([np.linspace(-1 / E, 0, 2001), -np.logspace(-300, -0.44, 200)])
    x = x[x > -1 / E]
    w = optima.lambert_w0(x)
    assert np.allclose(w, lambertw(x).real, rtol=1e-13, atol=1e-8)
    assert np.max(np.abs(w * np.exp(w) - x)) < 1e-13


def test_lambert_special_points():
    assert optima.lambert_w0(0.0) == 0.0
    assert optima.lambert_w0(-1 / E) == pytest.approx(-1.0, abs=1e-7)
    assert optima.lambert_w0(-2 / E**2) == pytest.approx(float(lambertw(-2 / E**2).real), rel=1e-15)


@pytest.mark.parametrize("x", [0.1, -0.4, math.nan])
def test_lambert_domain(x):
    with pytest.raises(ValueError):
        optima.lambert_w0(x)


# --- two-level optima ------------------------------------------------------------

@pytest.mark.parametrize("delta", [0.2, 0.5, 1.3, 3.0])
@pytest.mark.parametrize("eta", [1.0, 0.55])
@pytest.mark.parametrize("probe", ["coherent", "fock"])
def test_two_level_optimal_depth_matches_numeric(delta, eta, probe):
    a_num, f_num = optima.argmax_alpha(0.0, 0.0, delta, eta, probe)
    assert optima.optimal_alpha_twolevel(delta, eta, probe) == pytest.approx(a_num, rel=1e-5)
    assert optima.optimal_fi_twolevel(delta, eta, probe) == pytest.approx(f_num, rel=1e-10)


def test_two_level_peak_values():
    assert optima.optimal_fi_twolevel(0.5) == pytest.approx(16 / E**2, rel=1e-15)
    assert optima.optimal_alpha_twolevel(0.5) == 4.0
    assert optima.optimal_fi_twolevel(0.5, 1.0, "fock") == pytest.approx(2.5905, abs=1e-4)
    assert optima.optimal_alpha_twolevel(0.5, 1.0, "fock") == pytest.approx(3.1873, abs=1e-4)
    with pytest.raises(NoFiniteOptimum):
        optima.optimal_alpha_twolevel(0.0)


def test_absorption_limited_enhancement():
    w = float(lambertw(-2 / E**2).real)
    assert optima.qef_twolevel_limit(1.0) == pytest.approx(-(E**2 / 2) * w * (1 + w / 2), rel=1e-15)
    assert optima.qef_twolevel_limit(1.0) == pytest.approx(1.19631, abs=1e-5)
    assert optima.qef_twolevel_limit(1e-6) == pytest.approx(1.0, abs=1e-5)


# --- Lambda-medium optima over optical depth ----------------------------------------

LAMBDA_POINTS = [(1.0, 1e-3, 0.3), (2.0, 0.05, 0.8), (0.5, 0.3, 1.2), (3.0, 1e-2, 2.0), (1.4, 0.1, 0.05)]


@pytest.mark.parametrize("omega,gamma,delta", LAMBDA_POINTS)
@pytest.mark.parametrize("eta,probe", [(1.0, "coherent"), (1.0, "fock"), (0.4, "fock")])
def test_lambda_optimum_matches_numeric(omega, gamma, delta, eta, probe):
    a_num, f_num = optima.argmax_alpha(omega, gamma, delta, eta, probe)
    assert optima.optimal_alpha_lambda(omega, gamma, delta, eta, probe) == pytest.approx(a_num, rel=1e-5)
    assert optima.optimal_fi_lambda(omega, gamma, delta, eta, probe) == pytest.approx(f_num, rel=1e-9)


def test_lambda_reduces_to_two_level():
    for d in (0.3, 0.5, 2.0):
        for probe in ("coherent", "fock"):
            assert optima.optimal_alpha_lambda(0.0, 0.0, d, 0.8, probe) == pytest.approx(
                optima.optimal_alpha_twolevel(d, 0.8, probe), rel=1e-14)
            assert optima.optimal_fi_lambda(0.0, 0.0, d, 0.8, probe) == pytest.approx(
                optima.optimal_fi_twolevel(d, 0.8, probe), rel=1e-14)


def test_lossless_window_has_no_finite_optimum():
    with pytest.raises(NoFiniteOptimum):
        optima.optimal_alpha_lambda(2.0, 0.0, 0.0)
    with pytest.raises(NoFiniteOptimum):
        optima.optimal_fi_lambda(2.0, 0.0, 0.0)


# --- traces and demarcation ------------------------------------------------------

def test_two_level_classical_trace():
    tr = optima.trace_max_fi(0.0, [4.0], probe="coherent", tol=1e-10)
    assert tr.delta_opt[0] == pytest.approx(0.5, abs=1e-6)
    assert tr.fi_opt[0] == pytest.approx(16 / E**2, rel=1e-12)


def test_trace_threads_match_serial():
    alphas = np.linspace(1, 30, 12)
    a = optima.trace_max_fi(2.0, alphas)
    b = optima.trace_max_fi(2.0, alphas, workers=4)
    assert np.array_equal(a.delta_opt, b.delta_opt)
    assert np.array_equal(a.fi_opt, b.fi_opt)


def test_trace_window_grows_for_wide_lines():
    tr = optima.trace_max_fi(0.0, [400.0], probe="coherent", tol=1e-9)
    dense = np.linspace(0, 40, 400001)
    fc = fi_classical(MediumParams(400.0), 1.0, dense)
    assert tr.delta_opt[0] > 4
    assert tr.delta_opt[0] == pytest.approx(dense[np.argmax(fc)], abs=2e-4)


def test_trace_rejects_bad_grid():
    with pytest.raises(ValueError):
        optima.trace_max_fi(1.0, [3.0, 2.0])


def test_demarcation_formula():
    assert optima.demarcation_alpha(4.0) == 186.0
    assert optima.demarcation_alpha(6.0) == 426.0
    assert optima.demarcation_alpha(1 / math.sqrt(2)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        optima.demarcation_alpha(0.5)


def test_quartic_expansion_tracks_collapse():
    for a in (180.0, 185.0):
        d, _ = optima.max_over_delta(MediumParams(a, 4.0), ProbeSpec.fock(), tol=1e-12)
        assert optima.sideband_detuning_quantum(4.0, a) == pytest.approx(d, rel=0.02)
    assert optima.sideband_detuning_quantum(4.0, 190.0) is None


def test_demarcation_numeric_lossless():
    r = optima.demarcation_numeric(2.0)
    assert r.transition_found
    assert abs(r.alpha_d_numeric - 42.0) <= 2 * r.grid_step


def test_decoherence_removes_transition():
    assert optima.demarcation_numeric(2.0, 1e-4).transition_found
    assert not optima.demarcation_numeric(2.0, 1e-2).transition_found


def test_classical_sideband_asymptote():
    for a in (1000.0, 5000.0):
        side = optima.classical_opt_detuning_lambda(4.0, a)
        d, _ = optima.max_over_delta(MediumParams(a, 4.0), ProbeSpec.coherent(), tol=1e-12)
        assert side.valid
        assert side.offset == pytest.approx(d, rel=0.08)
    with pytest.raises(ValueError):
        optima.classical_opt_detuning_lambda(4.0, 100.0)


def test_enhancement_limits():
    lim = optima.qef_lambda_limits()
    assert lim["high_alpha_resonance"] == E
    assert lim["at_classical_optimum"] == pytest.approx(E / (E - 1))
    assert optima.qef_lambda_limits(0.5)["high_alpha_resonance"] is None
    num = optima.verify_qef_lambda_limits(2.0, 100.0)
    assert num["qef_resonance_vs_sideband"] == pytest.approx(E, rel=0.01)
    assert num["qef_at_classical_optimum"] == pytest.approx(E / (E - 1), rel=0.01)


# --- loss ----------------------------------------------------------------------

def test_transparency_enhancement_with_loss():
    etas = np.linspace(0.01, 0.99, 99)
    q = np.array([optima.qef_loss_resonance(e) for e in etas])
    assert np.all(np.diff(q) > 0)
    assert optima.qef_loss_resonance(1 - 1e-9) > 1e8
    with pytest.raises(ValueError):
        optima.qef_loss_resonance(1.0)


def test_loss_crossings():
    c = optima.loss_crossings(1.2)
    assert optima.qef_loss_resonance(c.eta_vs_cap) == pytest.approx(1.2, abs=1e-12)
    assert 0.2 < c.eta_vs_cap < 0.23
    assert c.eta_vs_same_eta is None
    assert c.min_gap_same_eta > 0


def test_transparency_dominance():
    omega = 2.0
    a = optima.transparency_dominance_alpha(omega)
    peak = optima.optimal_fi_twolevel(0.5, 1.0, "fock")
    assert fi_quantum(MediumParams(a, omega), 1.0, 0.0) == pytest.approx(4 * peak, rel=1e-12)
    assert a / omega**4 == pytest.approx(peak / 4, rel=1e-15)


def test_resonance_beats_classical_at_high_depth():
    m = MediumParams(4200.0, 2.0)
    d, fc = optima.max_over_delta(m, ProbeSpec.coherent())
    assert fi_quantum(m, 1.0, 0.0) / fc == pytest.approx(E, rel=0.01)
    assert fi_classical(m, 1.0, d) == pytest.approx(fc)


# --- further reference points -------------------------------------------------------

def test_optimal_detuning_independent_of_efficiency():
    d = np.linspace(0.01, 3, 2991)
    for eta in (0.3, 0.7, 1.0):
        for probe in ("coherent", "fock"):
            f = [optima.optimal_fi_twolevel(x, eta, probe) for x in d]
            assert d[int(np.argmax(f))] == pytest.approx(0.5, abs=1e-9)


def test_two_level_optimal_depth_values():
    assert optima.optimal_alpha_twolevel(1.0) == 10.0
    assert optima.optimal_alpha_twolevel(0.5, 1.0, "fock") == pytest.approx(3.187, abs=1e-3)


def test_enhancement_at_partial_efficiency_matches_numeric():
    _, fc = optima.argmax_alpha(0.0, 0.0, 0.5, 0.5, "coherent")
    _, fq = optima.argmax_alpha(0.0, 0.0, 0.5, 0.5, "fock")
    assert optima.qef_twolevel_limit(0.5) == pytest.approx(fq / fc, rel=1e-9)


def test_resonance_optimal_depth_is_small_detuning_limit():
    # FI vanishes identically at resonance, so compare with the argmax just off it
    closed = optima.optimal_alpha_lambda(1.0, 1e-3, 0.0)
    numeric, _ = optima.argmax_alpha(1.0, 1e-3, 1e-4)
    assert closed == pytest.approx(numeric, rel=1e-4)
    assert optima.optimal_fi_lambda(1.0, 1e-3, 0.0) == 0.0


def test_lambda_quantum_to_classical_depth_ratio():
    for eta in (0.2, 1.0):
        ratio = optima.optimal_alpha_lambda(2.0, 0.1, 0.7, eta, "fock") / optima.optimal_alpha_lambda(2.0, 0.1, 0.7, eta)
        assert ratio == pytest.approx(1 + float(lambertw(-2 * eta / E**2).real) / 2, rel=1e-14)


def test_trace_collapse_examples():
    tr = optima.trace_max_fi(1.0, [7.0, 10.0, 20.0])
    assert np.all(tr.delta_opt == 0)
    tr = optima.trace_max_fi(2.0, [38.0, 40.0, 41.5, 42.5])
    assert np.all(tr.delta_opt[:3] > 0) and np.all(np.diff(tr.delta_opt[:3]) < 0)
    assert tr.delta_opt[3] == 0


def test_sideband_detuning_value():
    assert optima.classical_opt_detuning_lambda(2.0, 442.0).offset == pytest.approx(0.1, rel=1e-14)
    assert not optima.classical_opt_detuning_lambda(2.0, 42.0 + 1e-6).valid
    side = optima.classical_opt_detuning_lambda(2.0, 4200.0)
    fc = fi_classical(MediumParams(4200.0, 2.0), 1.0, side.offset)
    assert fc / (16 * 4200 / (E * 16)) == pytest.approx(1.0, abs=0.02)


def test_enhancement_between_limits_at_twice_demarcation():
    alpha = 2 * optima.demarcation_alpha(2.0)
    m = MediumParams(alpha, 2.0)
    _, fc = optima.max_over_delta(m, ProbeSpec.coherent())
    q = fi_quantum(m, 1.0, 0.0) / fc
    assert 1 < q < E


def test_loss_enhancement_small_efficiency():
    assert optima.qef_loss_resonance(1e-6) == pytest.approx(1.0, abs=1e-5)
