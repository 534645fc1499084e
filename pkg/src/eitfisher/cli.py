"""spectool: spectra, Fisher-information sweeps, optima and Monte-Carlo runs as data files.

Settings resolve as command-line flag, then ``--config`` file (flat JSON
object keyed by flag name), then built-in default. The resolved settings are
written into every output header so a run can be repeated exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, lineshape, optima
from .export import ExportTable
from .fisher import fi_for_probe, fi_frequency
from .lineshape import MediumParams
from .mclab import MCConfig, run_campaign
from .photonstat import ProbeSpec

SUBCOMMANDS = ("spectrum", "fi", "map", "trace", "optimal", "mc")

DEFAULTS = {
    "alpha": 4.0,
    "omega_c": 0.0,
    "gamma_gs": 0.0,
    "eta": 1.0,
    "delta_c": 0.0,
    "probe": "fock",
    "mean_photons": 1.0,
    "delta_min": -10.0,
    "delta_max": 10.0,
    "delta_steps": 801,
    "alpha_min": 0.5,
    "alpha_max": 50.0,
    "alpha_steps": 400,
    "eta_min": 0.001,
    "eta_max": 0.999,
    "eta_steps": 999,
    "vary": "delta",
    "seed": 20240601,
    "shots": 10000,
    "trials": 500,
    "true_delta": 0.5,
    "window_lo": 0.05,
    "window_hi": 5.0,
    "workers": 1,
    "format": "csv",
    "out": None,
}

# Per-subcommand defaults that differ from the global ones.
SUB_DEFAULTS = {
    "optimal": {"delta_min": -3.0, "delta_max": 3.0, "delta_steps": 601},
    "map": {"delta_steps": 401, "alpha_min": 0.0, "alpha_steps": 401},
}

_COMMON_KEYS = {"alpha", "omega_c", "gamma_gs", "eta", "delta_c", "probe", "mean_photons", "delta_min",
                "delta_max", "delta_steps", "alpha_min", "alpha_max", "alpha_steps", "workers", "format", "out"}
SUB_KEYS = {name: set(_COMMON_KEYS) for name in ("spectrum", "fi", "map", "trace")}
SUB_KEYS["optimal"] = _COMMON_KEYS | {"vary", "eta_min", "eta_max", "eta_steps"}
SUB_KEYS["mc"] = _COMMON_KEYS | {"seed", "shots", "trials", "true_delta", "window_lo", "window_hi"}

_INT_KEYS = {"delta_steps", "alpha_steps", "eta_steps", "seed", "shots", "trials", "workers"}


@dataclass
class RunConfig:
    """Fully resolved settings for one subcommand."""

    subcommand: str
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        s = self.settings
        for axis in ("delta", "alpha", "eta"):
            if s[f"{axis}_steps"] < 2:
                raise ValueError(f"--{axis}-steps must be >= 2")
            if not s[f"{axis}_max"] > s[f"{axis}_min"]:
                raise ValueError(f"--{axis}-max must exceed --{axis}-min")
        if s["format"] not in ("csv", "json"):
            raise ValueError("--format must be csv or json")

    def __getattr__(self, name):
        try:
            return self.__dict__["settings"][name]
        except KeyError as exc:
            raise AttributeError(name) from exc

    @property
    def medium(self) -> MediumParams:
        return MediumParams(self.alpha, self.omega_c, self.gamma_gs, self.delta_c)

    @property
    def probe_spec(self) -> ProbeSpec:
        if self.probe == "fock":
            return ProbeSpec.fock(self.eta)
        return ProbeSpec.coherent(self.mean_photons, self.eta)

    def grid(self, axis: str) -> np.ndarray:
        s = self.settings
        return np.linspace(s[f"{axis}_min"], s[f"{axis}_max"], s[f"{axis}_steps"])

    def command_line(self) -> str:
        parts = ["spectool", self.subcommand]
        for key, value in sorted(self.settings.items()):
            if value is None or key not in SUB_KEYS[self.subcommand]:
                continue
            parts += [f"--{key.replace('_', '-')}", _cell_text(value)]
        return " ".join(parts)

    def provenance(self) -> dict:
        return {
            "tool": f"spectool {__version__}",
            "command": self.command_line(),
            "config": {"subcommand": self.subcommand,
                       **{k: v for k, v in self.settings.items() if k in SUB_KEYS[self.subcommand]}},
        }


def _cell_text(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _add_common(p: argparse.ArgumentParser):
    f = p.add_argument
    f("--config", help="flat JSON file of settings keyed by flag name")
    f("--alpha", type=float, help="optical depth")
    f("--omega-c", type=float, help="coupling Rabi frequency (Gamma)")
    f("--gamma-gs", type=float, help="ground-state decoherence rate (Gamma)")
    f("--eta", type=float, help="detection efficiency in [0, 1]")
    f("--delta-c", type=float, help="coupling detuning (Gamma)")
    f("--probe", choices=("coherent", "fock"))
    f("--mean-photons", type=float, help="coherent-probe mean photon number per shot")
    f("--delta-min", type=float)
    f("--delta-max", type=float)
    f("--delta-steps", type=int)
    f("--alpha-min", type=float)
    f("--alpha-max", type=float)
    f("--alpha-steps", type=int)
    f("--workers", type=int, help="threads for row-parallel work")
    f("--format", choices=("csv", "json"))
    f("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectool", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"spectool {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    helps = {
        "spectrum": "transmission spectrum T(delta)",
        "fi": "classical and single-photon FI and enhancement factor vs detuning",
        "map": "FI over an (alpha, delta) grid for the chosen probe",
        "trace": "FI-maximizing detuning vs optical depth",
        "optimal": "FI optimized over optical depth (vs delta), over detuning (vs alpha), or loss curves (vs eta)",
        "mc": "Monte-Carlo maximum-likelihood run compared with the Cramer-Rao bound",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_common(p)
        if name == "optimal":
            p.add_argument("--vary", choices=("delta", "alpha", "eta"))
            p.add_argument("--eta-min", type=float)
            p.add_argument("--eta-max", type=float)
            p.add_argument("--eta-steps", type=int)
        if name == "mc":
            p.add_argument("--seed", type=int)
            p.add_argument("--shots", type=int)
            p.add_argument("--trials", type=int)
            p.add_argument("--true-delta", type=float)
            p.add_argument("--window-lo", type=float)
            p.add_argument("--window-hi", type=float)
    return ap


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a flat JSON object")
    out = {}
    for key, value in raw.items():
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(value, (dict, list)):
            raise ValueError(f"config value for {key!r} must be a scalar")
        out[key] = value
    return out


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags over config file over defaults."""
    settings = dict(DEFAULTS)
    settings.update(SUB_DEFAULTS.get(args.subcommand, {}))
    if args.config:
        settings.update(_load_config_file(args.config))
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            settings[key] = value
    for key in settings:
        if settings[key] is None:
            continue
        if key in _INT_KEYS:
            settings[key] = int(settings[key])
        elif isinstance(DEFAULTS[key], float):
            settings[key] = float(settings[key])
    return RunConfig(args.subcommand, settings)


# --- subcommands ---------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig) -> ExportTable:
    delta = cfg.grid("delta")
    t = lineshape.transmission(cfg.medium, delta)
    rows = [[float(d), float(v)] for d, v in zip(delta, t)]
    return ExportTable(["delta_ge", "transmission"], ["Gamma", "1"], rows, cfg.provenance())


def cmd_fi(cfg: RunConfig) -> ExportTable:
    rows = []
    for d in cfg.grid("delta"):
        s = fi_frequency(cfg.medium, cfg.eta, float(d))
        rows.append([s.delta_ge, s.fi_classical, s.fi_quantum, s.qef])
    return ExportTable(["delta_ge", "fi_classical", "fi_quantum", "qef"],
                       ["Gamma", "1/Gamma^2", "1/Gamma^2", "1"], rows, cfg.provenance())


def cmd_map(cfg: RunConfig) -> ExportTable:
    delta = cfg.grid("delta")
    probe = cfg.probe_spec
    rows = []
    for a in cfg.grid("alpha"):
        fi = np.atleast_1d(fi_for_probe(cfg.medium.replace(alpha=float(a)), probe, delta))
        rows.extend([float(a), float(d), float(v)] for d, v in zip(delta, fi))
    return ExportTable(["alpha", "delta_ge", "fi"], ["1", "Gamma", "1/Gamma^2"], rows, cfg.provenance())


def _require_symmetric(cfg: RunConfig):
    if cfg.delta_c != 0:
        raise ValueError("tracing over a one-sided detuning window needs --delta-c 0")


def cmd_trace(cfg: RunConfig) -> ExportTable:
    _require_symmetric(cfg)
    tr = optima.trace_max_fi(cfg.omega_c, cfg.grid("alpha"), cfg.gamma_gs, cfg.eta, cfg.probe,
                             workers=cfg.workers)
    rows = [[a, d, f, float(g)] for a, d, f, g in tr.rows()]
    return ExportTable(["alpha", "delta_opt", "fi_opt", "d_delta_opt_d_alpha"],
                       ["1", "Gamma", "1/Gamma^2", "Gamma"], rows, cfg.provenance())


def _optimal_vs_delta(cfg: RunConfig) -> list[list]:
    rows = []
    for d in cfg.grid("delta"):
        d = float(d)
        values = []
        for kind in ("coherent", "fock"):
            try:
                if cfg.delta_c == 0:
                    a = optima.optimal_alpha_lambda(cfg.omega_c, cfg.gamma_gs, d, cfg.eta, kind)
                    f = optima.optimal_fi_lambda(cfg.omega_c, cfg.gamma_gs, d, cfg.eta, kind)
                else:
                    medium = cfg.medium
                    a, f = optima.argmax_alpha(medium.omega_c, medium.gamma_gs, d, cfg.eta, kind)
            except optima.NoFiniteOptimum:
                unbounded = cfg.omega_c > 0 and cfg.gamma_gs == 0
                a, f = (math.inf, math.inf) if unbounded else (math.nan, 0.0)
            values += [a, f]
        a_c, f_c, a_q, f_q = values
        qef = f_q / f_c if f_c > 0 and math.isfinite(f_c) else math.nan
        rows.append([d, a_c, f_c, a_q, f_q, qef])
    return rows


def cmd_optimal(cfg: RunConfig) -> ExportTable:
    prov = cfg.provenance()
    if cfg.vary == "delta":
        if cfg.delta_c != 0:
            raise ValueError("--delta-c must be 0 for closed-form optima")
        return ExportTable(
            ["delta_ge", "alpha_c_opt", "fi_c_opt", "alpha_q_opt", "fi_q_opt", "qef"],
            ["Gamma", "1", "1/Gamma^2", "1", "1/Gamma^2", "1"], _optimal_vs_delta(cfg), prov)
    if cfg.vary == "alpha":
        _require_symmetric(cfg)
        alphas = cfg.grid("alpha")
        trc = optima.trace_max_fi(cfg.omega_c, alphas, cfg.gamma_gs, cfg.eta, "coherent",
                                  derivative=False, workers=cfg.workers)
        trq = optima.trace_max_fi(cfg.omega_c, alphas, cfg.gamma_gs, cfg.eta, "fock",
                                  derivative=False, workers=cfg.workers)
        rows = []
        for a, dc, fc, dq, fq in zip(alphas, trc.delta_opt, trc.fi_opt, trq.delta_opt, trq.fi_opt):
            rows.append([float(a), float(dc), float(fc), float(dq), float(fq),
                         float(fq / fc) if fc > 0 else math.nan])
        return ExportTable(["alpha", "delta_c_opt", "fi_c_opt", "delta_q_opt", "fi_q_opt", "qef"],
                           ["1", "Gamma", "1/Gamma^2", "Gamma", "1/Gamma^2", "1"], rows, prov)
    crossings = optima.loss_crossings()
    prov["loss_crossings"] = asdict(crossings)
    rows = []
    for e in cfg.grid("eta"):
        e = float(e)
        rows.append([e, optima.qef_twolevel_limit(e), optima.qef_loss_resonance(e)])
    return ExportTable(["eta", "qef_absorption_opt", "qef_transparency_resonance"],
                       ["1", "1", "1"], rows, prov)


def cmd_mc(cfg: RunConfig) -> ExportTable:
    mc = MCConfig(cfg.medium, cfg.probe_spec, cfg.true_delta, cfg.shots, cfg.trials, cfg.seed,
                  cfg.window_lo, cfg.window_hi)
    report = run_campaign(mc, workers=cfg.workers)
    d = asdict(report)
    units = {"true_delta": "Gamma", "window_lo": "Gamma", "window_hi": "Gamma", "mean": "Gamma",
             "bias": "Gamma", "variance": "Gamma^2", "crb": "Gamma^2", "crb_std": "Gamma",
             "inv_fi": "Gamma^2", "inv_sqrt_fi": "Gamma", "fi_per_shot": "1/Gamma^2",
             "omega_c": "Gamma", "gamma_gs": "Gamma", "delta_c": "Gamma"}
    cols = list(d)
    return ExportTable(cols, [units.get(c, "1") for c in cols], [[d[c] for c in cols]], cfg.provenance())


COMMANDS = {
    "spectrum": cmd_spectrum,
    "fi": cmd_fi,
    "map": cmd_map,
    "trace": cmd_trace,
    "optimal": cmd_optimal,
    "mc": cmd_mc,
}


def run(argv=None) -> tuple[RunConfig, ExportTable]:
    args = build_parser().parse_args(argv)
    cfg = resolve(args)
    return cfg, COMMANDS[cfg.subcommand](cfg)


def main(argv=None) -> int:
    try:
        cfg, table = run(argv)
    except (ValueError, OSError) as exc:
        print(f"spectool: error: {exc}", file=sys.stderr)
        return 2
    text = table.render(cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
