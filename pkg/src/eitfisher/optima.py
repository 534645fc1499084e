"""Optimal operating points and limits of frequency-estimation Fisher information.

Closed-form optima over optical depth, the principal Lambert W branch they
depend on, numeric tracing of FI-maximizing detunings, detection of the
absorption/transparency demarcation and the analytic enhancement-factor
limits. Units: Gamma = 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .fisher import fi_classical, fi_for_probe, fi_quantum
from .lineshape import MediumParams
from .photonstat import ProbeKind, ProbeSpec
from .search import golden_section_max, grid_golden_max

__all__ = [
    "NoFiniteOptimum",
    "lambert_w0",
    "optimal_alpha_twolevel",
    "optimal_fi_twolevel",
    "qef_twolevel_limit",
    "TraceResult",
    "max_over_delta",
    "trace_max_fi",
    "demarcation_alpha",
    "DemarcationReport",
    "demarcation_numeric",
    "critical_decoherence",
    "SidebandDetuning",
    "sideband_detuning_quantum",
    "classical_opt_detuning_lambda",
    "qef_lambda_limits",
    "verify_qef_lambda_limits",
    "optimal_alpha_lambda",
    "optimal_fi_lambda",
    "qef_loss_resonance",
    "LossCrossings",
    "loss_crossings",
    "transparency_dominance_alpha",
    "argmax_alpha",
]

E = math.e
_INV_E = 1 / E


class NoFiniteOptimum(ValueError):
    """The Fisher information grows without bound (or is identically zero) in the optimized variable."""


# --- Lambert W --------------------------------------------------------------


def lambert_w0(x):
    """Principal branch of the Lambert W function on ``[-1/e, 0]``.

    Halley iteration started from the branch-point series near ``-1/e`` and
    from the Taylor series at the origin elsewhere.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x > 0) or np.any(x < -_INV_E * (1 + 4e-16)):
        raise ValueError("lambert_w0 is implemented on [-1/e, 0]")
    x = np.maximum(x, -_INV_E)
    p = np.sqrt(np.maximum(2 * (E * x + 1), 0.0))
    near_branch = -1 + p - p**2 / 3 + 11 / 72 * p**3
    near_zero = x - x**2 + 1.5 * x**3
    w = np.where(x < -0.25, near_branch, near_zero)
    for _ in range(60):
        ew = np.exp(w)
        f = w * ew - x
        wp1 = w + 1
        with np.errstate(divide="ignore", invalid="ignore"):
            dw = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        dw = np.where(np.isfinite(dw), dw, 0.0)
        w = w - dw
        if np.all(np.abs(dw) <= 4e-16 * (1 + np.abs(w))):
            break
    return w[()]


def _kind(probe) -> ProbeKind:
    if isinstance(probe, ProbeSpec):
        return probe.kind
    return ProbeKind(probe)


def _w(eta: float) -> float:
    return float(lambert_w0(-2 * eta / E**2))


def _alpha_ratio(eta: float) -> float:
    # alpha_q,opt / alpha_c,opt
    return 1 + _w(eta) / 2


# --- two-level optima --------------------------------------------------------


def optimal_alpha_twolevel(delta_ge: float, eta: float = 1.0, probe="coherent") -> float:
    """Optical depth maximizing the two-level Fisher information at fixed detuning."""
    if delta_ge == 0:
        raise NoFiniteOptimum("two-level Fisher information vanishes at resonance for every alpha")
    classical = 2 * (4 * delta_ge**2 + 1)
    if _kind(probe) is ProbeKind.COHERENT:
        return classical
    return classical * _alpha_ratio(eta)


def optimal_fi_twolevel(delta_ge: float, eta: float = 1.0, probe="coherent") -> float:
    """Two-level Fisher information at the optimal optical depth.

    Both probe classes peak at ``delta_ge = +-1/2`` whatever ``eta``.
    """
    if delta_ge == 0:
        raise NoFiniteOptimum("two-level Fisher information vanishes at resonance for every alpha")
    d2 = delta_ge**2
    if _kind(probe) is ProbeKind.COHERENT:
        return 256 * eta * d2 / (E**2 * (4 * d2 + 1) ** 2)
    w = _w(eta)
    return -128 * d2 * w * (1 + w / 2) / (4 * d2 + 1) ** 2


def qef_twolevel_limit(eta: float = 1.0) -> float:
    """Enhancement factor when both probes sit at their optimal optical depth (about 1.2 at eta = 1)."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    w = _w(eta)
    return -(E**2 / (2 * eta)) * w * (1 + w / 2)


# --- tracing maximal FI over detuning ---------------------------------------


@dataclass(frozen=True)
class TraceResult:
    """FI-maximizing detuning as a function of optical depth.

    ``delta_opt`` is the non-negative member of the symmetric pair.
    ``d_delta_d_alpha`` holds centred differences along the alpha grid.
    """

    omega_c: float
    gamma_gs: float
    eta: float
    probe: ProbeKind
    alpha: np.ndarray
    delta_opt: np.ndarray
    fi_opt: np.ndarray
    d_delta_d_alpha: np.ndarray | None = None

    def rows(self):
        deriv = self.d_delta_d_alpha if self.d_delta_d_alpha is not None else [None] * len(self.alpha)
        return list(zip(self.alpha.tolist(), self.delta_opt.tolist(), self.fi_opt.tolist(), list(deriv)))


def _default_window(omega_c: float) -> float:
    return max(2 * omega_c, 4.0)


def max_over_delta(medium: MediumParams, probe: ProbeSpec, window: float | None = None,
                   n_grid: int = 512, tol: float = 1e-6) -> tuple[float, float]:
    """Global maximizer ``delta >= 0`` of the probe's FI and the FI there.

    The search window doubles while the optimum sits on its upper edge.
    """
    window = window if window is not None else _default_window(medium.omega_c)

    def f(d):
        return fi_for_probe(medium, probe, d)

    for _ in range(8):
        x, fx = grid_golden_max(f, 0.0, window, n_grid=n_grid, tol=tol)
        if x < window * (1 - 1e-6):
            return x, fx
        window *= 2
    return x, fx


def trace_max_fi(omega_c: float, alphas, gamma_gs: float = 0.0, eta: float = 1.0, probe="fock",
                 window: float | None = None, n_grid: int = 512, tol: float = 1e-6,
                 derivative: bool = True, workers: int = 1) -> TraceResult:
    """Trace the FI-maximizing detuning over a grid of optical depths.

    Each alpha gets a ``n_grid``-point scan of ``[0, window]`` refined by
    golden-section search to ``tol``. With ``workers > 1`` the alpha rows
    run on a thread pool; the output order is that of ``alphas``.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        raise ValueError("alpha grid is empty")
    if np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha grid must be strictly increasing")
    kind = _kind(probe)
    spec = ProbeSpec.fock(eta) if kind is ProbeKind.FOCK else ProbeSpec.coherent(eta=eta)

    def row(a):
        return max_over_delta(MediumParams(alpha=a, omega_c=omega_c, gamma_gs=gamma_gs), spec, window, n_grid, tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(row, alphas))
    else:
        found = [row(a) for a in alphas]
    deltas = np.array([d for d, _ in found])
    fis = np.array([f for _, f in found])
    deriv = None
    if derivative and alphas.size >= 2:
        deriv = np.gradient(deltas, alphas)
    return TraceResult(omega_c, gamma_gs, eta, kind, alphas, deltas, fis, deriv)


# --- demarcation between absorption and transparency dominance ---------------


def demarcation_alpha(omega_c: float) -> float:
    """Optical depth ``12 omega_c^2 - 6`` where the quantum FI maximum collapses onto resonance.

    Requires ``omega_c >= 1/sqrt(2)`` so that the result is non-negative.
    """
    if omega_c < 1 / math.sqrt(2) * (1 - 1e-12):
        raise ValueError("demarcation needs omega_c >= 1/sqrt(2)")
    return max(12 * omega_c**2 - 6, 0.0)


@dataclass(frozen=True)
class DemarcationReport:
    omega_c: float
    gamma_gs: float
    alpha_d_analytic: float
    alpha_d_numeric: float | None
    transition_found: bool
    grid_step: float
    diagnostics: str = ""
    trace: TraceResult | None = field(default=None, repr=False)


def _collapsed(delta_opt, omega_c: float):
    return np.asarray(delta_opt) < 1e-4 * omega_c


def _interior_peaks(s: np.ndarray, rel_prominence: float) -> list[int]:
    peaks = []
    for i in range(1, len(s) - 1):
        if s[i] > s[i - 1] and s[i] >= s[i + 1]:
            left, right = s[: i + 1].min(), s[i:].min()
            if s[i] - max(left, right) > rel_prominence * abs(s[i]):
                peaks.append(i)
    return peaks


def demarcation_numeric(omega_c: float, gamma_gs: float = 0.0, alpha_window=None, n_alpha: int = 161,
                        refine: bool = True, rel_prominence: float = 1e-4) -> DemarcationReport:
    """Locate the demarcation numerically from the quantum FI trace.

    Without decoherence the transition is the smallest alpha at which the
    maximizing detuning drops below ``1e-4 omega_c`` (optionally refined by
    bisection). With decoherence the maximizer never reaches zero; the
    transition is instead declared when ``-d delta_opt / d alpha`` has a
    local maximum inside the window.
    """
    alpha_d = demarcation_alpha(omega_c)
    if alpha_window is None:
        alpha_window = (0.5 * alpha_d, 1.5 * alpha_d)
    lo, hi = map(float, alpha_window)
    alphas = np.linspace(lo, hi, n_alpha)
    step = float(alphas[1] - alphas[0])
    tol = 1e-6 if gamma_gs == 0 else 1e-11
    trace = trace_max_fi(omega_c, alphas, gamma_gs=gamma_gs, eta=1.0, probe="fock", tol=tol)

    if gamma_gs == 0:
        collapsed = _collapsed(trace.delta_opt, omega_c)
        if collapsed[0] or not collapsed[-1]:
            return DemarcationReport(omega_c, gamma_gs, alpha_d, None, False, step,
                                     "window does not bracket the collapse", trace)
        first = int(np.argmax(collapsed))
        a_lo, a_hi = alphas[first - 1], alphas[first]
        if refine:
            probe = ProbeSpec.fock()
            while a_hi - a_lo > 1e-3 * step:
                mid = 0.5 * (a_lo + a_hi)
                d, _ = max_over_delta(MediumParams(mid, omega_c), probe)
                if _collapsed(d, omega_c):
                    a_hi = mid
                else:
                    a_lo = mid
        return DemarcationReport(omega_c, gamma_gs, alpha_d, float(a_hi), True, step,
                                 f"collapse between alpha={alphas[first - 1]:.6g} and {alphas[first]:.6g}", trace)

    s = -trace.d_delta_d_alpha
    peaks = _interior_peaks(s, rel_prominence)
    if not peaks:
        return DemarcationReport(omega_c, gamma_gs, alpha_d, None, False, step,
                                 "no local maximum of -d(delta_opt)/d(alpha) in window", trace)
    best = max(peaks, key=lambda i: s[i])
    return DemarcationReport(omega_c, gamma_gs, alpha_d, float(alphas[best]), True, step,
                             f"{len(peaks)} local maximum(s); strongest at alpha={alphas[best]:.6g}", trace)


def critical_decoherence(omega_c: float, lo: float = 1e-5, hi: float = 1e-2, rtol: float = 0.05,
                         n_alpha: int = 161) -> float:
    """Smallest decoherence rate for which the trace-derivative peak disappears.

    Bisection in ``log(gamma_gs)``; ``lo`` must show the transition and
    ``hi`` must not.
    """
    def found(g):
        return demarcation_numeric(omega_c, g, n_alpha=n_alpha).transition_found

    if not found(lo) or found(hi):
        raise ValueError("the interval does not bracket the critical decoherence rate")
    while hi / lo > 1 + rtol:
        mid = math.sqrt(lo * hi)
        if found(mid):
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def sideband_detuning_quantum(omega_c: float, alpha: float) -> float | None:
    """Near-resonance single-photon FI maxima from the quartic expansion about resonance.

    Returns the positive detuning, or ``None`` where the expansion has no
    real off-resonance extremum. A cross-check only; the numeric trace is
    authoritative.
    """
    w2 = omega_c**2
    num = 3 * (6 + alpha) - 36 * w2
    den = (72 + alpha * (24 + alpha)) / w2**2 - 48 * (6 + alpha) / w2 + 228
    ratio = num / den
    if ratio <= 0:
        return None
    return 0.5 * math.sqrt(ratio)


class SidebandDetuning(NamedTuple):
    centre: float
    offset: float
    valid: bool


def classical_opt_detuning_lambda(omega_c: float, alpha: float, window: float | None = None) -> SidebandDetuning:
    """Near-resonance classical FI maxima ``+-omega_c^2 / (2 sqrt(alpha - alpha_d))``.

    ``valid`` is False when the offset falls outside the search window
    (it diverges as alpha approaches the demarcation from above).
    """
    alpha_d = demarcation_alpha(omega_c)
    if alpha <= alpha_d:
        raise ValueError("sideband optimum exists only above the demarcation optical depth")
    offset = omega_c**2 / (2 * math.sqrt(alpha - alpha_d))
    window = window if window is not None else _default_window(omega_c)
    return SidebandDetuning(0.0, offset, offset <= window)


def qef_lambda_limits(eta: float = 1.0) -> dict:
    """High-optical-depth enhancement limits of a lossless window.

    ``high_alpha_resonance`` compares single-photon resonance information
    with the best classical information (Euler's number); it exists only
    for ``eta = 1``. ``at_classical_optimum`` is the enhancement at the
    classical sideband detuning, ``1/(1 - eta/e)``.
    """
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return {
        "high_alpha_resonance": E if eta == 1 else None,
        "at_classical_optimum": 1 / (1 - eta / E),
    }


def verify_qef_lambda_limits(omega_c: float = 2.0, alpha_factor: float = 100.0) -> dict:
    """Evaluate both enhancement limits numerically at ``alpha = alpha_factor * alpha_d``."""
    alpha = alpha_factor * demarcation_alpha(omega_c)
    medium = MediumParams(alpha, omega_c)
    side = classical_opt_detuning_lambda(omega_c, alpha)
    fc_side = float(fi_classical(medium, 1.0, side.offset))
    fq_side = float(fi_quantum(medium, 1.0, side.offset))
    fq_res = float(fi_quantum(medium, 1.0, 0.0))
    _, fc_max = max_over_delta(medium, ProbeSpec.coherent(), n_grid=4096, tol=1e-10)
    return {
        "alpha": alpha,
        "sideband_detuning": side.offset,
        "qef_resonance_vs_sideband": fq_res / fc_side,
        "qef_resonance_vs_classical_max": fq_res / fc_max,
        "qef_at_classical_optimum": fq_side / fc_side,
        "classical_sideband_vs_asymptote": fc_side / (16 * alpha / (E * omega_c**4)),
    }


# --- optima over optical depth for the Lambda medium ---------------------------


def optimal_alpha_lambda(omega_c: float, gamma_gs: float, delta_ge: float, eta: float = 1.0,
                         probe="coherent") -> float:
    """Optical depth maximizing the Lambda-medium FI at fixed detuning (``delta_c = 0``).

    The classical optimum does not depend on ``eta``; the single-photon one
    is scaled by ``1 + W(-2 eta/e^2)/2``.
    """
    g, d2, w2 = gamma_gs, delta_ge**2, omega_c**2
    den = g**2 + 4 * d2 + g * w2
    if den == 0:
        raise NoFiniteOptimum("the lossless window keeps gaining information with optical depth")
    classical = 2 * ((1 + 4 * d2) * (g**2 + 4 * d2) + 2 * (g - 4 * d2) * w2 + w2**2) / den
    if _kind(probe) is ProbeKind.COHERENT:
        return classical
    return classical * _alpha_ratio(eta)


def optimal_fi_lambda(omega_c: float, gamma_gs: float, delta_ge: float, eta: float = 1.0,
                      probe="coherent") -> float:
    """Lambda-medium FI at the optimal optical depth (``delta_c = 0``).

    The single-photon value is the classical one times the two-level
    absorption-limited enhancement factor.
    """
    g, d2, w2 = gamma_gs, delta_ge**2, omega_c**2
    inner = g**2 + 4 * d2 + g * w2
    if inner == 0:
        raise NoFiniteOptimum("the lossless window keeps gaining information with optical depth")
    outer = (1 + 4 * d2) * (g**2 + 4 * d2) + 2 * (g - 4 * d2) * w2 + w2**2
    bracket = (g**2 + 4 * d2) ** 2 - g * (1 + 2 * g - g**2 - 8 * d2) * w2 - (1 + 2 * g) * w2**2
    classical = 256 * d2 * eta * bracket**2 / (E**2 * inner**2 * outer**2)
    if _kind(probe) is ProbeKind.COHERENT:
        return classical
    return qef_twolevel_limit(eta) * classical


def argmax_alpha(omega_c: float, gamma_gs: float, delta_ge: float, eta: float = 1.0, probe="coherent",
                 alpha_max: float = 1e6, n_grid: int = 400, tol: float = 1e-10) -> tuple[float, float]:
    """Numeric maximizer of the FI over optical depth at fixed detuning.

    Scans ``log(alpha)`` on ``[1e-3, alpha_max]`` and refines by golden
    section; shares no algebra with the closed-form optima.
    """
    kind = _kind(probe)
    spec = ProbeSpec.fock(eta) if kind is ProbeKind.FOCK else ProbeSpec.coherent(eta=eta)

    def f(log_a):
        return float(fi_for_probe(MediumParams(math.exp(log_a), omega_c, gamma_gs), spec, delta_ge))

    grid = np.linspace(math.log(1e-3), math.log(alpha_max), n_grid)
    values = np.array([f(x) for x in grid])
    i = int(np.argmax(values))
    if i == n_grid - 1:
        raise NoFiniteOptimum(f"FI still increasing at alpha_max={alpha_max:g}")
    lo, hi = grid[max(i - 1, 0)], grid[i + 1]
    x, fx = golden_section_max(f, lo, hi, tol=tol)
    return math.exp(x), fx


# --- technical loss ---------------------------------------------------------------


def qef_loss_resonance(eta: float) -> float:
    """Resonance enhancement ``[1 + W(-2 eta/e^2)/2]^2 / (1 - eta)`` of a lossless window with loss."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    return _alpha_ratio(eta) ** 2 / (1 - eta)


@dataclass(frozen=True)
class LossCrossings:
    """Where the transparency enhancement overtakes absorption-limited enhancement.

    ``eta_vs_cap`` solves ``qef_loss_resonance(eta) = cap``;
    ``eta_vs_absorption_limit`` solves it against ``qef_twolevel_limit(1)``
    and ``eta_vs_same_eta`` against ``qef_twolevel_limit(eta)`` (``None``:
    no crossing inside (0, 1)).
    """

    cap: float
    eta_vs_cap: float
    eta_vs_absorption_limit: float
    eta_vs_same_eta: float | None
    min_gap_same_eta: float


def loss_crossings(cap: float = 1.2) -> LossCrossings:
    def crossing(level):
        return optimize.bisect(lambda e: qef_loss_resonance(e) - level, 1e-9, 1 - 1e-9, xtol=1e-14)

    etas = np.linspace(1e-6, 1 - 1e-6, 4001)
    gap = np.array([qef_loss_resonance(e) - qef_twolevel_limit(e) for e in etas])
    sign_change = np.flatnonzero(np.diff(np.sign(gap)) != 0)
    same = None
    if sign_change.size:
        i = int(sign_change[0])
        same = optimize.bisect(lambda e: qef_loss_resonance(e) - qef_twolevel_limit(e), etas[i], etas[i + 1])
    return LossCrossings(cap, crossing(cap), crossing(qef_twolevel_limit(1.0)), same, float(gap.min()))


def transparency_dominance_alpha(omega_c: float) -> float:
    """Optical depth above which resonance information beats the ATS absorption maximum.

    Solves ``16 alpha / omega_c^4 = 4 F_q,max`` with ``F_q,max`` the
    two-level single-photon optimum (about ``0.65 omega_c^4``).
    """
    return 4 * optimal_fi_twolevel(0.5, 1.0, "fock") * omega_c**4 / 16
