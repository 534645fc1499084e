"""Steady-state response and transmission of a Lambda-type (or two-level) medium.

All rates and detunings are in units of the excited-state decay rate Gamma.
Functions accept scalars or numpy arrays for the probe detuning and broadcast.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MediumParams",
    "ComplexResponse",
    "response_at",
    "attenuation",
    "attenuation_derivative",
    "transmission",
    "transmission_slope",
    "transmission_derivative",
    "eit_bandwidth",
]


@dataclass(frozen=True)
class MediumParams:
    """Atomic cell configuration.

    Parameters
    ----------
    alpha : float
        Optical depth. On-resonance two-level transmission is ``exp(-alpha)``.
    omega_c : float
        Coupling Rabi frequency magnitude. ``0`` gives a two-level medium.
    gamma_gs : float
        Ground-state decoherence rate.
    delta_c : float
        Coupling detuning.
    gamma_ge : float
        Excited-state decay rate; the unit of every other rate.
    """

    alpha: float
    omega_c: float = 0.0
    gamma_gs: float = 0.0
    delta_c: float = 0.0
    gamma_ge: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "omega_c", "gamma_gs"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not np.isfinite(self.delta_c):
            raise ValueError(f"delta_c must be finite, got {self.delta_c!r}")
        if not self.gamma_ge > 0:
            raise ValueError(f"gamma_ge must be > 0, got {self.gamma_ge!r}")

    @property
    def is_two_level(self) -> bool:
        return self.omega_c == 0

    @property
    def lossless_window(self) -> bool:
        """True when the two-photon resonance is perfectly transparent."""
        return self.omega_c > 0 and self.gamma_gs == 0

    def replace(self, **changes) -> "MediumParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ComplexResponse:
    d_ge: complex | np.ndarray
    d_gs: complex | np.ndarray
    big_d: complex | np.ndarray


def response_at(medium: MediumParams, delta_ge) -> ComplexResponse:
    """Complex coherence denominators at steady state (zero sideband frequency)."""
    delta = np.asarray(delta_ge, dtype=float)
    d_ge = medium.gamma_ge / 2 - 1j * delta
    d_gs = medium.gamma_gs / 2 - 1j * (delta - medium.delta_c)
    big_d = d_ge * d_gs + medium.omega_c**2 / 4
    return ComplexResponse(d_ge=np.asarray(d_ge)[()], d_gs=np.asarray(d_gs)[()], big_d=np.asarray(big_d)[()])


def _response_ratio(medium: MediumParams, delta: np.ndarray) -> np.ndarray:
    # d_gs / D. With no coupling field D = d_ge * d_gs exactly, so the ratio is
    # 1/d_ge; cancelling first keeps the two-level resonance exact.
    d_ge = medium.gamma_ge / 2 - 1j * delta
    if medium.omega_c**2 == 0:
        return 1 / d_ge
    d_gs = medium.gamma_gs / 2 - 1j * (delta - medium.delta_c)
    return d_gs / (d_ge * d_gs + medium.omega_c**2 / 4)


def attenuation(medium: MediumParams, delta_ge):
    """Return ``-ln T``, the optical attenuation exponent at probe detuning ``delta_ge``."""
    delta = np.asarray(delta_ge, dtype=float)
    if medium.alpha == 0:
        return np.zeros_like(delta)[()]
    ratio = _response_ratio(medium, delta)
    return (medium.alpha * medium.gamma_ge / 2 * ratio.real)[()]


def transmission(medium: MediumParams, delta_ge):
    """Steady-state intensity transmission through the cell, in [0, 1]."""
    return np.exp(-np.asarray(attenuation(medium, delta_ge)))[()]


def _fd_step(delta: np.ndarray) -> np.ndarray:
    return 1e-6 * np.maximum(1.0, np.abs(delta))


def _attenuation_fd(medium: MediumParams, delta: np.ndarray) -> np.ndarray:
    # Central difference with one Richardson level.
    h = _fd_step(delta)

    def central(step):
        return (attenuation(medium, delta + step) - attenuation(medium, delta - step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def transmission_slope(medium: MediumParams, delta_ge):
    """dT/d(delta_ge) in units of 1/Gamma, by finite differences.

    Differentiates the attenuation exponent numerically and applies
    ``dT = -T d(-ln T)``, which keeps full relative precision where T is
    close to 0 or 1.
    """
    delta = np.asarray(delta_ge, dtype=float)
    t = np.asarray(transmission(medium, delta))
    return (-t * _attenuation_fd(medium, delta))[()]


def attenuation_derivative(medium: MediumParams, delta_ge):
    """Exact d(-ln T)/d(delta_ge) from the derivative of the complex response."""
    delta = np.asarray(delta_ge, dtype=float)
    if medium.alpha == 0:
        return np.zeros_like(delta)[()]
    d_ge = medium.gamma_ge / 2 - 1j * delta
    if medium.omega_c**2 == 0:
        # d/d delta of 1/d_ge, with d(d_ge)/d delta = -i
        dratio = 1j / d_ge**2
    else:
        d_gs = medium.gamma_gs / 2 - 1j * (delta - medium.delta_c)
        big_d = d_ge * d_gs + medium.omega_c**2 / 4
        dratio = (-1j * big_d + 1j * d_gs * (d_gs + d_ge)) / big_d**2
    return (medium.alpha * medium.gamma_ge / 2 * dratio.real)[()]


def transmission_derivative(medium: MediumParams, delta_ge):
    """Exact dT/d(delta_ge); smooth to rounding, used inside optimizers."""
    delta = np.asarray(delta_ge, dtype=float)
    t = np.asarray(transmission(medium, delta))
    return (-t * np.asarray(attenuation_derivative(medium, delta)))[()]


def eit_bandwidth(medium: MediumParams) -> float:
    """Transparency-window width ``sqrt(ln2/alpha) * omega_c**2 / Gamma``."""
    if medium.alpha <= 0:
        raise ValueError("bandwidth is undefined for zero optical depth")
    return float(np.sqrt(np.log(2) / medium.alpha) * medium.omega_c**2 / medium.gamma_ge)
