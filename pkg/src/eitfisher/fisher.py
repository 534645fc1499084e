"""Fisher information for estimating the probe detuning.

The generic path applies the chain rule ``F(delta) = (dT/d delta)^2 F(T)``
to the lineshape slope. The vectorized functions differentiate the complex
response exactly so optimizers see a smooth landscape;
:func:`fi_frequency_bruteforce` instead combines a finite-difference slope
with the photon-number sum and shares nothing with them. Closed forms for the lossless
(``gamma_gs = 0``) medium serve as cross-checks, and the transparency-window
resonance, where ``F(T)`` diverges while the slope vanishes, is handled by its
exact limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lineshape
from .lineshape import MediumParams
from .photonstat import DivergentInformation, ProbeSpec, fi_transmission, fi_transmission_bruteforce

__all__ = [
    "FISample",
    "FICurve",
    "fi_classical",
    "fi_quantum",
    "fi_for_probe",
    "fi_frequency",
    "fi_curve",
    "fi_frequency_bruteforce",
    "fi_frequency_closed_classical",
    "fi_frequency_closed_quantum",
    "fi_resonance_limit",
    "fi_taylor_coefficients",
]


@dataclass(frozen=True)
class FISample:
    """Classical and single-photon Fisher information at one detuning.

    ``divergent_q`` marks points where the single-photon information about
    the transmission is infinite and ``fi_quantum`` is the finite limit;
    ``qef`` is then ``inf``. ``undefined`` marks points with no finite limit.
    """

    delta_ge: float
    fi_classical: float
    fi_quantum: float
    qef: float
    divergent_q: bool = False
    undefined: bool = False


@dataclass(frozen=True)
class FICurve:
    medium: MediumParams
    probe_eta: float
    samples: tuple[FISample, ...]

    def __post_init__(self):
        deltas = [s.delta_ge for s in self.samples]
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("samples must be strictly increasing in delta_ge")

    @property
    def delta(self) -> np.ndarray:
        return np.array([s.delta_ge for s in self.samples])

    @property
    def classical(self) -> np.ndarray:
        return np.array([s.fi_classical for s in self.samples])

    @property
    def quantum(self) -> np.ndarray:
        return np.array([s.fi_quantum for s in self.samples])

    @property
    def qef(self) -> np.ndarray:
        return np.array([s.qef for s in self.samples])


def _eta(probe) -> float:
    return probe.eta if isinstance(probe, ProbeSpec) else float(probe)


# Below this transmission eta/T overflows while slope**2 underflows; the
# product is then evaluated as eta * T * (d ln T / d delta)**2 instead.
_T_FLOOR = 1e-150


def _pieces(medium, delta):
    x = np.asarray(lineshape.attenuation(medium, delta), dtype=float)
    t = np.exp(-x)
    slope = np.asarray(lineshape.transmission_derivative(medium, delta), dtype=float)
    return x, t, slope


def _deep(medium, delta, t, eta):
    return eta * t * np.asarray(lineshape.attenuation_derivative(medium, delta), dtype=float) ** 2


def fi_classical(medium: MediumParams, eta: float, delta_ge):
    """Coherent-probe Fisher information per photon for the detuning (vectorized)."""
    delta = np.asarray(delta_ge, dtype=float)
    x, t, slope = _pieces(medium, delta)
    out = np.zeros_like(delta)
    ok = t > _T_FLOOR
    if np.any(ok):
        out[ok] = slope[ok] ** 2 * fi_transmission(ProbeSpec.coherent(eta=eta), t[ok])
    if not np.all(ok):
        out[~ok] = _deep(medium, delta[~ok], t[~ok], eta)
    return out[()]


def _quantum_with_flags(medium: MediumParams, eta: float, delta: np.ndarray):
    x, t, slope = _pieces(medium, delta)
    absorbed = -np.expm1(-x)
    out = np.zeros_like(delta)
    divergent = (eta == 1) & (absorbed == 0)
    undefined = np.zeros(delta.shape, dtype=bool)
    ok = ~divergent & (t > _T_FLOOR)
    if np.any(ok):
        out[ok] = slope[ok] ** 2 * fi_transmission(ProbeSpec.fock(eta=eta), t[ok], absorbed=absorbed[ok])
    deep = t <= _T_FLOOR
    if np.any(deep):
        # 1 - eta*T == 1 to double precision here
        out[deep] = _deep(medium, delta[deep], t[deep], eta)
    if np.any(divergent):
        if medium.alpha == 0:
            out[divergent] = 0.0
        elif medium.lossless_window:
            # Zero attenuation at finite depth only happens at (or numerically
            # indistinguishably close to) the two-photon resonance.
            out[divergent] = fi_resonance_limit(medium)
        else:
            out[divergent] = np.nan
            undefined |= divergent
    return out, divergent, undefined


def fi_quantum(medium: MediumParams, eta: float, delta_ge):
    """Single-photon Fisher information per photon for the detuning (vectorized).

    At the lossless transparency window the resonance limit replaces the
    undefined product ``0 * inf``.
    """
    delta = np.asarray(delta_ge, dtype=float)
    out, _, _ = _quantum_with_flags(medium, eta, delta)
    return out[()]


def fi_for_probe(medium: MediumParams, probe: ProbeSpec, delta_ge):
    """Fisher information per photon for the probe's own kind."""
    if probe.is_quantum:
        return fi_quantum(medium, probe.eta, delta_ge)
    return fi_classical(medium, probe.eta, delta_ge)


def fi_frequency(medium: MediumParams, probe, delta_ge: float) -> FISample:
    """Fisher information for frequency estimation at one detuning.

    ``probe`` may be a :class:`ProbeSpec` or a bare efficiency; only the
    efficiency matters because both probe classes are reported.
    """
    eta = _eta(probe)
    delta = np.asarray([float(delta_ge)])
    fq, divergent, undefined = _quantum_with_flags(medium, eta, delta)
    fc = np.asarray(fi_classical(medium, eta, delta)).reshape(1)
    x = float(lineshape.attenuation(medium, delta[0]))
    dark = (1 - eta) + eta * -np.expm1(-x)
    qef = float(1 / dark) if dark > 0 else float("inf")
    return FISample(
        delta_ge=float(delta[0]),
        fi_classical=float(fc[0]),
        fi_quantum=float(fq[0]),
        qef=qef,
        divergent_q=bool(divergent[0]),
        undefined=bool(undefined[0]),
    )


def fi_curve(medium: MediumParams, probe, deltas) -> FICurve:
    samples = tuple(fi_frequency(medium, probe, d) for d in np.asarray(deltas, dtype=float))
    return FICurve(medium=medium, probe_eta=_eta(probe), samples=samples)


def fi_frequency_bruteforce(medium: MediumParams, probe: ProbeSpec, delta_ge: float) -> float:
    """Chain rule with the photon-number sum evaluated directly.

    Combines the numerical lineshape slope with
    :func:`~eitfisher.photonstat.fi_transmission_bruteforce`; shares no
    algebra with the closed forms.
    """
    t = float(lineshape.transmission(medium, delta_ge))
    slope = float(lineshape.transmission_slope(medium, delta_ge))
    if slope == 0:
        return 0.0
    return slope**2 * fi_transmission_bruteforce(probe, t)


def _require_lossless(medium: MediumParams):
    if medium.gamma_gs != 0 or medium.delta_c != 0:
        raise ValueError("closed forms require gamma_gs = 0 and delta_c = 0")


def _closed_parts(medium: MediumParams, delta):
    g = medium.gamma_ge
    w2 = medium.omega_c**2
    d2 = delta**2
    den = 4 * g**2 * d2 + (w2 - 4 * d2) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        prefactor = 64 * medium.alpha**2 * g**4 * d2 * (w2**2 - 16 * d2**2) ** 2 / den**4
        exponent = 4 * medium.alpha * g**2 * d2 / den
    return prefactor, exponent


def fi_frequency_closed_classical(medium: MediumParams, eta: float, delta_ge):
    """Closed-form coherent-probe Fisher information of a lossless medium."""
    _require_lossless(medium)
    delta = np.asarray(delta_ge, dtype=float)
    prefactor, exponent = _closed_parts(medium, delta)
    out = eta * prefactor * np.exp(-exponent)
    out = np.where(delta == 0, 0.0, out)
    return out[()]


def fi_frequency_closed_quantum(medium: MediumParams, eta: float, delta_ge):
    """Closed-form single-photon Fisher information of a lossless medium.

    At ``delta_ge = 0`` the expression is 0/0; its limit is returned
    (the transparency-window value for ``eta = 1`` and ``omega_c > 0``,
    zero otherwise).
    """
    _require_lossless(medium)
    delta = np.asarray(delta_ge, dtype=float)
    prefactor, exponent = _closed_parts(medium, delta)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = eta * prefactor / (np.expm1(exponent) + (1 - eta))
    at_zero = 0.0
    if eta == 1 and medium.omega_c > 0:
        at_zero = fi_resonance_limit(medium)
    out = np.where(delta == 0, at_zero, out)
    return out[()]


def fi_resonance_limit(medium: MediumParams, eta: float = 1.0) -> float:
    """Single-photon information at the centre of a lossless transparency window.

    Equals ``16 alpha Gamma^2 / omega_c^4`` for ``eta = 1``. With ``eta < 1``
    the transmission information is finite and the slope vanishes, so the
    limit is zero.
    """
    if medium.omega_c == 0:
        raise ValueError("no transparency window without a coupling field")
    if medium.gamma_gs != 0:
        raise ValueError("the window is lossy for gamma_gs > 0; use the generic path")
    if eta < 1:
        return 0.0
    return 16 * medium.alpha * medium.gamma_ge**2 / medium.omega_c**4


def fi_taylor_coefficients(medium: MediumParams) -> tuple[float, float, float]:
    """Coefficients ``(c0, c2, c4)`` of the single-photon FI expanded about resonance.

    ``F_q = c0 + c2 delta^2 + c4 delta^4 + ...`` for a lossless window and
    perfect detection. ``c2`` changes sign at ``alpha = 12 omega_c^2 - 6``.
    """
    _require_lossless(medium)
    if medium.omega_c == 0:
        raise ValueError("expansion needs a coupling field")
    a = medium.alpha
    g2 = medium.gamma_ge**2
    w2 = medium.omega_c**2
    c0 = 16 * a * g2 / w2**2
    c2 = -32 * a * g2 / w2**4 * ((6 + a) * g2 - 12 * w2)
    c4 = 64 * a * g2 / (3 * w2**6) * ((72 + a * (a + 24)) * g2**2 - 48 * (a + 6) * g2 * w2 + 228 * w2**2)
    return c0, c2, c4
