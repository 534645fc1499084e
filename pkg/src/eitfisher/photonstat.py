"""Photon-number statistics after the medium and Fisher information for transmission.

Two probe classes are modelled: a coherent state (Poissonian counts) and a
single-photon Fock state (one click or none). A scalar efficiency ``eta``
lumps detection and technical loss. Fisher information is reported per
input photon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = [
    "DivergentInformation",
    "ProbeKind",
    "ProbeSpec",
    "PhotonDistribution",
    "output_distribution",
    "fi_transmission",
    "fi_transmission_bruteforce",
    "qef_transmission",
]


class DivergentInformation(ArithmeticError):
    """Raised where the Fisher information (or the enhancement factor) is infinite."""


class ProbeKind(str, enum.Enum):
    COHERENT = "coherent"
    FOCK = "fock"


@dataclass(frozen=True)
class ProbeSpec:
    kind: ProbeKind
    eta: float = 1.0
    mean_photons: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind(self.kind))
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.kind is ProbeKind.COHERENT and not self.mean_photons > 0:
            raise ValueError(f"mean_photons must be > 0, got {self.mean_photons!r}")
        if self.kind is ProbeKind.FOCK and self.mean_photons != 1.0:
            raise ValueError("a single-photon probe carries exactly one photon")

    @classmethod
    def coherent(cls, mean_photons: float = 1.0, eta: float = 1.0) -> "ProbeSpec":
        return cls(ProbeKind.COHERENT, eta=eta, mean_photons=mean_photons)

    @classmethod
    def fock(cls, eta: float = 1.0) -> "ProbeSpec":
        return cls(ProbeKind.FOCK, eta=eta)

    @property
    def is_quantum(self) -> bool:
        return self.kind is ProbeKind.FOCK


@dataclass(frozen=True)
class PhotonDistribution:
    """Output photon-number distribution on a finite support."""

    support: np.ndarray
    probabilities: np.ndarray
    kind: str

    def pmf(self, n: int) -> float:
        idx = np.searchsorted(self.support, n)
        if idx < len(self.support) and self.support[idx] == n:
            return float(self.probabilities[idx])
        return 0.0

    @property
    def total(self) -> float:
        return math.fsum(self.probabilities)

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probabilities))


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)) or np.any(~np.isfinite(t)):
        raise ValueError("transmission must lie in [0, 1]")
    return t


def _poisson_nmax(mean: float) -> int:
    # Grow the support until the tail mass is below 1e-12.
    n_max = int(math.ceil(mean + 10 * math.sqrt(mean) + 10))
    while stats.poisson.sf(n_max, mean) > 1e-12:
        n_max = int(n_max * 1.5) + 1
    return n_max


def output_distribution(probe: ProbeSpec, t: float) -> PhotonDistribution:
    """Photon-number distribution at the detector for transmission ``t``."""
    t = float(_check_t(t))
    p_click = probe.eta * t
    if probe.kind is ProbeKind.FOCK:
        return PhotonDistribution(np.array([0, 1]), np.array([1 - p_click, p_click]), "bernoulli")
    mean = p_click * probe.mean_photons
    n = np.arange(_poisson_nmax(mean) + 1)
    return PhotonDistribution(n, stats.poisson.pmf(n, mean), "poisson")


def fi_transmission(probe: ProbeSpec, t, *, absorbed=None):
    """Per-photon Fisher information for estimating the transmission.

    Coherent probes give ``eta/t``; single photons give ``eta/(t(1 - eta t))``.

    Parameters
    ----------
    probe : ProbeSpec
    t : float or array_like
        Transmission in (0, 1].
    absorbed : float or array_like, optional
        ``1 - t`` computed without cancellation (e.g. ``-expm1(-x)``). Only
        used by the single-photon formula, whose ``1 - eta t`` factor loses
        precision near perfect transmission.

    Raises
    ------
    DivergentInformation
        If any point has ``t == 0``, or ``eta * t == 1`` for a single photon.
    """
    t = _check_t(t)
    if np.any(t == 0):
        raise DivergentInformation("Fisher information diverges at zero transmission")
    eta = probe.eta
    if probe.kind is ProbeKind.COHERENT:
        return (eta / t)[()]
    if absorbed is None:
        dark = 1 - eta * t
    else:
        dark = (1 - eta) + eta * np.asarray(absorbed, dtype=float)
    if np.any(dark <= 0):
        raise DivergentInformation("single-photon Fisher information diverges at eta*T = 1")
    return (eta / (t * dark))[()]


def _probabilities(probe: ProbeSpec, t: float, support: np.ndarray) -> np.ndarray:
    # Analytic continuation past t = 1 is harmless here: only differences are used.
    if probe.kind is ProbeKind.FOCK:
        return np.array([1 - probe.eta * t, probe.eta * t])
    return stats.poisson.pmf(support, probe.eta * t * probe.mean_photons)


def fi_transmission_bruteforce(probe: ProbeSpec, t: float, dt_step: float | None = None) -> float:
    """Fisher information from the defining sum over photon numbers.

    Evaluates ``sum_n (dp/dT)^2 / p`` with the derivative taken by central
    differences (one Richardson level) and divides by the mean photon number.
    Independent of :func:`fi_transmission`; used as its oracle.
    """
    t = float(_check_t(t))
    if t == 0:
        raise DivergentInformation("Fisher information diverges at zero transmission")
    h = dt_step if dt_step is not None else 1e-5 * t
    if probe.kind is ProbeKind.FOCK:
        support = np.array([0, 1])
    else:
        support = np.arange(_poisson_nmax(probe.eta * t * probe.mean_photons) + 1)

    p = _probabilities(probe, t, support)
    if probe.kind is ProbeKind.FOCK and p[0] <= 0:
        raise DivergentInformation("single-photon Fisher information diverges at eta*T = 1")

    def central(step):
        return (_probabilities(probe, t + step, support) - _probabilities(probe, t - step, support)) / (2 * step)

    dp = (4 * central(h / 2) - central(h)) / 3
    keep = p > 0
    total = math.fsum(dp[keep] ** 2 / p[keep])
    return total / probe.mean_photons


def qef_transmission(eta: float, t):
    """Quantum-enhanced factor ``1/(1 - eta t)`` of single-photon over coherent probing."""
    t = _check_t(t)
    dark = 1 - eta * t
    if np.any(dark <= 0):
        raise DivergentInformation("enhancement factor diverges at eta*T = 1")
    return (1 / dark)[()]
