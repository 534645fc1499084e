import math

import numpy as np
import pytest
from scipy import stats

from eitfisher.lineshape import MediumParams, transmission
from eitfisher.mclab import MCConfig, MCReport, mle_delta, run_campaign, simulate_counts
from eitfisher.photonstat import ProbeSpec

TWO_LEVEL = MediumParams(4.0)
WINDOW = (0.05, 5.0)


def _cfg(probe=None, medium=TWO_LEVEL, delta=0.5, shots=10_000, trials=200, seed=1, window=WINDOW):
    return MCConfig(medium, probe or ProbeSpec.fock(), delta, shots, trials, seed, *window)


def test_fock_counts_at_full_and_zero_transmission():
    ones = simulate_counts(MCConfig(MediumParams(40.0, 1.4), ProbeSpec.fock(), 0.0, 100, 2, 3, 0.0, 0.1))
    assert all(np.all(c == 1) for c in ones)
    # zero click probability; a window with T == 0 everywhere cannot pass validation
    dark = _cfg(ProbeSpec.fock(0.0), trials=2, shots=100)
    assert all(np.all(c == 0) for c in simulate_counts(dark))


def test_coherent_mean_counts():
    m = MediumParams(math.log(2))  # T = 1/2 at resonance
    cfg = MCConfig(m, ProbeSpec.coherent(1.0), 0.0, 1_000_000, 1, 9, 0.0, 3.0)
    counts = simulate_counts(cfg)[0]
    assert abs(counts.mean() - 0.5) < 4 * math.sqrt(0.5 / 1e6)


def test_exact_expectation_data_recovers_truth():
    cfg = _cfg(shots=1_000_000)
    t = transmission(TWO_LEVEL, 0.5)
    ones = round(t * cfg.shots)
    counts = np.zeros(cfg.shots, dtype=int)
    counts[:ones] = 1
    # t*shots is not an integer; the estimate matches the rounded fraction.
    from scipy.optimize import brentq

    target = brentq(lambda d: transmission(TWO_LEVEL, d) - ones / cfg.shots, 0.05, 5.0, xtol=1e-15)
    est, failed = mle_delta(counts, cfg)
    assert not failed
    assert est == pytest.approx(target, abs=1e-8)


def test_unreachable_rate_fails_trial():
    cfg = _cfg()
    est, failed = mle_delta(np.ones(cfg.shots, dtype=int), cfg)
    assert failed and est == pytest.approx(WINDOW[1])


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(trials=0)
    with pytest.raises(ValueError):
        _cfg(shots=0)
    with pytest.raises(ValueError):
        _cfg(delta=6.0)
    with pytest.raises(ValueError):
        _cfg(window=(-1.0, 1.0))  # symmetric lineshape: ambiguous
    with pytest.raises(ValueError):
        _cfg(seed=-1)


def test_two_level_variance_near_bound():
    r = run_campaign(_cfg(trials=400, seed=11))
    assert 0.9 <= r.variance_over_crb <= 1.3
    assert r.crb_respected and r.failed_trials == 0
    assert r.crb == pytest.approx(1 / (1e4 * 16 * math.exp(-2) / (1 - math.exp(-2))), rel=1e-6)
    assert r.inv_sqrt_fi == pytest.approx(math.sqrt(r.inv_fi))


def test_eit_window_variance_near_bound():
    cfg = MCConfig(MediumParams(40.0, 1.4), ProbeSpec.fock(), 1e-3, 10_000, 2000, 5, 0.0, 0.1)
    r = run_campaign(cfg, workers=4)
    assert r.crb == pytest.approx(1 / (1e4 * 16 * 40 / 1.4**4), rel=1e-4)
    assert 0.9 <= r.variance_over_crb <= 1.3
    assert r.failed_trials == 0


def test_efficiency_approaches_one_with_shots():
    ratios = [run_campaign(_cfg(shots=n, trials=600, seed=21)).variance_over_crb for n in (100, 1000, 10_000)]
    assert all(0.8 <= q <= 1.4 for q in ratios)
    assert abs(ratios[-1] - 1) <= abs(ratios[0] - 1) + 0.1


def test_fock_beats_coherent_at_high_transmission():
    m = MediumParams(40.0, 1.4)
    assert transmission(m, 0.04) >= 0.9
    kw = dict(medium=m, delta=0.04, trials=500, window=(0.0, 0.1))
    rf = run_campaign(_cfg(ProbeSpec.fock(), seed=31, **kw))
    rc = run_campaign(_cfg(ProbeSpec.coherent(1.0), seed=32, **kw))
    f = rc.variance / rf.variance
    assert stats.f.sf(f, rc.trials - 1, rf.trials - 1) < 0.05
    assert rf.variance / rc.variance == pytest.approx(1 - transmission(m, 0.04), rel=0.25)


def test_reproducible_and_schedule_independent():
    cfg = _cfg(trials=50, seed=77)
    a = run_campaign(cfg)
    b = run_campaign(cfg, workers=3)
    assert a == b
    assert a.to_json() == b.to_json()
    assert run_campaign(_cfg(trials=50, seed=78)) != a


def test_report_json_round_trip():
    r = run_campaign(_cfg(trials=20))
    assert MCReport.from_json(r.to_json()) == r
