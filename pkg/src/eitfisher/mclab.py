"""Monte-Carlo photon-counting experiments with maximum-likelihood detuning estimation.

Each trial sends ``shots`` independent probes through the medium, records
the detected photon numbers and estimates the detuning by maximizing the
likelihood over a search window on which the transmission is monotone.
Trials draw from independent counter-based streams keyed by
``(seed, trial)``, so results do not depend on execution order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import xlogy

from . import lineshape
from .fisher import fi_for_probe
from .lineshape import MediumParams
from .photonstat import ProbeKind, ProbeSpec
from .search import grid_golden_max

__all__ = [
    "MCConfig",
    "TrialResult",
    "MCReport",
    "trial_rng",
    "simulate_counts",
    "mle_delta",
    "run_campaign",
]

_MONOTONE_GRID = 2049


@dataclass(frozen=True)
class MCConfig:
    """One Monte-Carlo campaign.

    The window ``(window_lo, window_hi)`` must contain ``true_delta`` and the
    transmission must be strictly monotone on it, so the likelihood has a
    single maximizer. For a symmetric lineshape this means a one-sided window.
    """

    medium: MediumParams
    probe: ProbeSpec
    true_delta: float
    shots: int
    trials: int
    seed: int
    window_lo: float
    window_hi: float

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots <= 0:
            raise ValueError("shots must be a positive integer")
        if int(self.trials) != self.trials or self.trials <= 0:
            raise ValueError("trials must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not self.window_lo < self.window_hi:
            raise ValueError("search window is empty")
        if not self.window_lo <= self.true_delta <= self.window_hi:
            raise ValueError("search window must contain true_delta")
        grid = np.linspace(self.window_lo, self.window_hi, _MONOTONE_GRID)
        steps = np.diff(lineshape.transmission(self.medium, grid))
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("transmission is not strictly monotone on the search window; "
                             "the detuning would be ambiguous")

    @property
    def rate_per_unit_t(self) -> float:
        """Mean detected photons per shot per unit transmission."""
        return self.probe.eta * self.probe.mean_photons


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent Philox stream for one trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


def _counts(config: MCConfig, trial: int) -> np.ndarray:
    rng = trial_rng(config.seed, trial)
    t = float(lineshape.transmission(config.medium, config.true_delta))
    if config.probe.kind is ProbeKind.FOCK:
        return (rng.random(config.shots) < config.probe.eta * t).astype(np.int64)
    return rng.poisson(config.rate_per_unit_t * t, config.shots).astype(np.int64)


def simulate_counts(config: MCConfig) -> list[np.ndarray]:
    """Per-shot detected photon numbers for every trial."""
    return [_counts(config, k) for k in range(config.trials)]


def _log_likelihood(config: MCConfig, total: int, delta):
    # Depends on the counts only through their sum (sufficient statistic).
    p = config.rate_per_unit_t * np.asarray(lineshape.transmission(config.medium, delta))
    n = config.shots
    if config.probe.kind is ProbeKind.FOCK:
        return xlogy(total, p) + xlogy(n - total, 1 - p)
    return xlogy(total, p) - n * p


def mle_delta(counts, config: MCConfig) -> tuple[float, bool]:
    """Maximum-likelihood detuning for one trial.

    Returns ``(estimate, failed)``. A trial fails when the likelihood peaks
    on a window edge because the observed rate is not attainable by any
    transmission inside the window.
    """
    counts = np.asarray(counts)
    total = int(counts.sum())
    lo, hi = config.window_lo, config.window_hi
    tol = 1e-10 * (hi - lo)
    est, _ = grid_golden_max(lambda d: _log_likelihood(config, total, d), lo, hi, n_grid=512, tol=tol)
    t_hat = total / (config.shots * config.rate_per_unit_t)
    t_edges = lineshape.transmission(config.medium, np.array([lo, hi]))
    t_min, t_max = float(t_edges.min()), float(t_edges.max())
    at_edge = est - lo <= 2 * tol or hi - est <= 2 * tol
    failed = bool(at_edge and not t_min <= t_hat <= t_max)
    return est, failed


@dataclass(frozen=True)
class TrialResult:
    trial: int
    estimate: float
    failed: bool
    total_counts: int


@dataclass(frozen=True)
class MCReport:
    """Aggregate of one campaign.

    ``crb`` is the variance bound ``1/(shots * F)`` with ``F`` the Fisher
    information per shot; ``crb_std`` is its square root. ``inv_fi`` and
    ``inv_sqrt_fi`` give the per-probe bound as a variance and as a
    standard deviation.
    """

    probe: str
    alpha: float
    omega_c: float
    gamma_gs: float
    delta_c: float
    eta: float
    mean_photons: float
    true_delta: float
    shots: int
    trials: int
    seed: int
    window_lo: float
    window_hi: float
    fi_per_shot: float
    mean: float
    bias: float
    variance: float
    crb: float
    crb_std: float
    inv_fi: float
    inv_sqrt_fi: float
    variance_over_crb: float
    failed_trials: int
    unreliable: bool
    crb_respected: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MCReport":
        return cls(**json.loads(text))


def _run_trial(config: MCConfig, trial: int) -> TrialResult:
    counts = _counts(config, trial)
    est, failed = mle_delta(counts, config)
    return TrialResult(trial, est, failed, int(counts.sum()))


def run_campaign(config: MCConfig, workers: int = 1, return_trials: bool = False):
    """Run all trials and compare the estimator variance with the Cramér-Rao bound.

    Trials may run on a thread pool; results are reduced in trial order so
    the report is bit-identical for a given seed whatever ``workers`` is.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: _run_trial(config, k), range(config.trials)))
    else:
        results = [_run_trial(config, k) for k in range(config.trials)]

    good = np.array([r.estimate for r in results if not r.failed])
    failed = config.trials - good.size
    fi_photon = float(fi_for_probe(config.medium, config.probe, config.true_delta))
    fi_shot = fi_photon * config.probe.mean_photons
    crb = 1 / (config.shots * fi_shot) if fi_shot > 0 else math.inf
    if good.size >= 2:
        mean = float(good.mean())
        variance = float(good.var(ddof=1))
    else:
        mean = float(good.mean()) if good.size else math.nan
        variance = math.nan
    slack = 1 - 3 / math.sqrt(max(good.size, 1))
    report = MCReport(
        probe=config.probe.kind.value,
        alpha=config.medium.alpha,
        omega_c=config.medium.omega_c,
        gamma_gs=config.medium.gamma_gs,
        delta_c=config.medium.delta_c,
        eta=config.probe.eta,
        mean_photons=config.probe.mean_photons,
        true_delta=config.true_delta,
        shots=config.shots,
        trials=config.trials,
        seed=int(config.seed),
        window_lo=config.window_lo,
        window_hi=config.window_hi,
        fi_per_shot=fi_shot,
        mean=mean,
        bias=mean - config.true_delta,
        variance=variance,
        crb=crb,
        crb_std=math.sqrt(crb),
        inv_fi=1 / fi_shot if fi_shot > 0 else math.inf,
        inv_sqrt_fi=1 / math.sqrt(fi_shot) if fi_shot > 0 else math.inf,
        variance_over_crb=variance / crb,
        failed_trials=failed,
        unreliable=failed > 0.1 * config.trials,
        crb_respected=bool(variance >= crb * slack),
    )
    if return_trials:
        return report, results
    return report
