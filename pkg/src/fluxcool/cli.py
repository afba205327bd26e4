"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 compute error.  Errors are reported
on stderr as a one-line JSON object with a ``category`` field.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import PRESETS, RunConfig, load_config, load_preset
from .dynamics import equilibrium_p11, steady_state
from .errors import ComputeError, ConfigError, FluxCoolError, InputError
from .model import DriveConfig, ang, temperature_to_millikelvin, to_ghz
from .output import (
    AXIS_HEADERS,
    metadata_text,
    reduced_rows,
    render_table,
    sweep_rows,
    write_atomic,
)
from .rates import TRUNCATION_RULE, assemble_generator
from .sweep import (
    default_peak_omegas,
    log_grid,
    optimal_amplitude,
    peak_w12_frequency,
    predicted_amplitude,
    run_sweep,
)

THREADS_ENV = "FLUXCOOL_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_common(p, with_source=True):
    if with_source:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="YAML run configuration")
        src.add_argument("--preset", help=f"bundled configuration ({', '.join(PRESETS)})")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--format", choices=("csv", "json"), help="data file format")


def _add_point(p):
    p.add_argument("--detuning", type=float, help="dc flux detuning [mPhi0]")
    p.add_argument("--phi-rf", type=float, help="drive amplitude [mPhi0]")
    p.add_argument("--omega", type=float, help="drive frequency omega/2pi [GHz]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fluxcool", description="Microwave cooling of a driven four-level flux qubit.")
    parser.add_argument("--version", action="version", version=f"fluxcool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("rates", "print the transition rates at one drive point"),
        ("steady", "print the steady state at one drive point"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_point(p)
    p = sub.add_parser("sweep", help="run the configured grid and write the dataset")
    _add_common(p)
    p = sub.add_parser("optimize", help="scan amplitudes for the lowest p11 at one point")
    _add_common(p)
    _add_point(p)
    p = sub.add_parser("figure", help="run a bundled figure preset")
    p.add_argument("preset", help=f"one of {', '.join(PRESETS)}")
    _add_common(p, with_source=False)
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get(THREADS_ENV)
        if env is None or env == "":
            return 1
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"${THREADS_ENV}: expected an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError(f"threads must be >= 1, got {n}")
    return n


def _load(args) -> RunConfig:
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    return load_config(args.config)


def _point(cfg: RunConfig, args) -> dict:
    d = dict(cfg.drive)
    if getattr(args, "detuning", None) is not None:
        d["detuning_dc"] = args.detuning
    if getattr(args, "phi_rf", None) is not None:
        d["phi_rf"] = args.phi_rf
    if getattr(args, "omega", None) is not None:
        if not (args.omega > 0 and math.isfinite(args.omega)):
            raise ConfigError(f"--omega: must be positive, got {args.omega!r}")
        d["omega"] = ang(args.omega)
    return d


def _drive(cfg, point) -> DriveConfig:
    return DriveConfig(cfg.method.waveform, point["phi_rf"], point["omega"], point["detuning_dc"])


def _point_doc(cfg, point) -> dict:
    return {
        "method": cfg.method.value,
        "detuning_dc_mphi0": point["detuning_dc"],
        "phi_rf_mphi0": point["phi_rf"],
        "omega_ghz": to_ghz(point["omega"]),
    }


def _print(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def cmd_rates(cfg, args) -> int:
    point = _point(cfg, args)
    gen = assemble_generator(cfg.model, _drive(cfg, point), cfg.activation)
    rates = {k: to_ghz(v) for k, v in gen.rates.as_dict().items() if isinstance(v, float)}
    _print({**_point_doc(cfg, point), "units": "GHz (rate/2pi)", "rates": rates, "config_hash": cfg.config_hash})
    return 0


def cmd_steady(cfg, args) -> int:
    point = _point(cfg, args)
    ss = steady_state(assemble_generator(cfg.model, _drive(cfg, point), cfg.activation))
    eps10 = (cfg.model.m0 + cfg.model.m1) * point["detuning_dc"]
    _print(
        {
            **_point_doc(cfg, point),
            "p": [float(v) for v in ss.p],
            "p11": ss.p11,
            "residual": ss.residual,
            "t_eff_mk": None if ss.t_eff is None else temperature_to_millikelvin(ss.t_eff),
            "p11_equilibrium": equilibrium_p11(eps10, cfg.model.temperature),
            "config_hash": cfg.config_hash,
        }
    )
    return 0


class _Emitter:
    """Writes data files plus one metadata sidecar for a run."""

    def __init__(self, cfg: RunConfig, args, command: str):
        self.cfg = cfg
        self.dir = Path(args.out) if args.out else Path(cfg.output_dir)
        self.fmt = args.format or cfg.formats[0]
        self.command = command
        self.files = []

    def table(self, stem, columns, rows):
        path = self.dir / f"{stem}.{self.fmt}"
        write_atomic(path, render_table(columns, rows, self.cfg.config_hash, self.cfg.method.value, self.fmt))
        self.files.append(path.name)
        return path

    def sidecar(self, extra):
        meta = {
            "command": self.command,
            "name": self.cfg.name,
            "config_hash": self.cfg.config_hash,
            "config": self.cfg.raw,
            "model_hash": self.cfg.model.digest(),
            "method": self.cfg.method.value,
            "interwell_activation": self.cfg.activation.value,
            "truncation": dict(TRUNCATION_RULE),
            "files": self.files,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            **extra,
        }
        path = self.dir / f"{self.cfg.name}.meta.json"
        write_atomic(path, metadata_text(meta))
        return path


def _axes_doc(grid):
    return {n: {"header": AXIS_HEADERS[n], "size": int(a.size)} for n, a in grid.axes.items()}


def _equilibrium_fn(cfg):
    def f(values):
        d = values.get("detuning_dc", cfg.drive["detuning_dc"])
        return equilibrium_p11((cfg.model.m0 + cfg.model.m1) * d, cfg.model.temperature)

    return f


def _run_grid(cfg, args, command) -> int:
    grid = cfg.sweep_grid()
    workers = _threads(args)
    model = cfg.model
    result = run_sweep(model, grid, workers=workers, activation=cfg.activation)
    em = _Emitter(cfg, args, command)
    em.table(cfg.name, *sweep_rows(result))
    if cfg.reduce_amplitude:
        em.table(f"{cfg.name}_min", *reduced_rows(result, _equilibrium_fn(cfg)))
    em.sidecar({"axes": _axes_doc(grid), "failures": result.failures, "cells": int(result.p11.size)})
    return _report_failures(result.failures, int(result.p11.size))


def _report_failures(failures, total) -> int:
    if not failures:
        return 0
    _error("compute", f"{len(failures)} of {total} cells failed; see the metadata sidecar")
    return 2


def cmd_sweep(cfg, args) -> int:
    return _run_grid(cfg, args, "sweep")


def cmd_optimize(cfg, args) -> int:
    point = _point(cfg, args)
    axes = {a.name: a.values for a in cfg.axes}
    if "phi_rf" in axes:
        amps = axes["phi_rf"]
        rng = (float(amps[0]), float(amps[-1]))
        step = float(np.min(np.diff(amps))) if amps.size > 1 else 0.01
    else:
        rng, step = None, None
    opt = optimal_amplitude(
        cfg.model, point["detuning_dc"], point["omega"], cfg.method, rng, step, _threads(args), cfg.activation
    )
    em = _Emitter(cfg, args, "optimize")
    rows = [[a, p] for a, p in zip(opt.amplitudes, opt.p11)]
    em.table(f"{cfg.name}_optimize", [AXIS_HEADERS["phi_rf"], "p11"], rows)
    doc = {
        **_point_doc(cfg, point),
        "phi_rf_star_mphi0": opt.phi_rf_star,
        "p11_star": opt.p11_star,
        "at_edge": opt.at_edge,
        "config_hash": cfg.config_hash,
    }
    em.sidecar({"optimum": doc})
    _print(doc)
    return 0


def _peak_figure(cfg, args) -> int:
    peak_cfg = cfg.peak
    workers = _threads(args)
    em = _Emitter(cfg, args, "figure")
    summary, envelope = [], []
    for g2 in peak_cfg.gamma2:
        m = cfg.model.replace(gamma2=g2)
        if peak_cfg.omega_max is None:
            omegas = default_peak_omegas(m, peak_cfg.per_decade)
        else:
            omegas = log_grid(ang(0.001), peak_cfg.omega_max, peak_cfg.per_decade)
        peak = peak_w12_frequency(cfg.model, peak_cfg.detuning_dc, g2, omegas, workers=workers)
        summary.append([to_ghz(g2), to_ghz(peak.omega_peak), to_ghz(peak.w12_peak), peak.at_edge])
        pops = None
        if peak_cfg.with_population:
            c = predicted_amplitude(m, peak_cfg.detuning_dc, cfg.method)
            rng = (max(0.0, round(c - 1.0, 2)), round(c + 1.0, 2))
            pops = [optimal_amplitude(m, peak_cfg.detuning_dc, w, cfg.method, rng, 0.01, workers, cfg.activation)
                    for w in omegas]
        for k, w in enumerate(omegas):
            row = [to_ghz(g2), to_ghz(w), to_ghz(peak.envelope[k]), peak.best_amplitudes[k]]
            if pops is not None:
                row += [pops[k].p11_star, pops[k].phi_rf_star]
            envelope.append(row)
    em.table(
        cfg.name,
        [AXIS_HEADERS["gamma2"], "omega_peak/2pi[GHz]", "w12_peak/2pi[GHz]", "at_edge"],
        summary,
    )
    cols = [AXIS_HEADERS["gamma2"], AXIS_HEADERS["omega"], "w12_max/2pi[GHz]", "phi_rf_at_max[mPhi0]"]
    if peak_cfg.with_population:
        cols += ["p11_min", "phi_rf_star[mPhi0]"]
    em.table(f"{cfg.name}_envelope", cols, envelope)
    em.sidecar({"detuning_dc": peak_cfg.detuning_dc, "gamma2_ghz": [to_ghz(g) for g in peak_cfg.gamma2]})
    return 0


def cmd_figure(args) -> int:
    if args.preset not in PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r}; valid presets: {', '.join(PRESETS)}")
    cfg = load_preset(args.preset)
    if cfg.kind == "peak_frequency":
        return _peak_figure(cfg, args)
    return _run_grid(cfg, args, "figure")


_COMMANDS = {"rates": cmd_rates, "steady": cmd_steady, "sweep": cmd_sweep, "optimize": cmd_optimize}


def _error(category, message) -> None:
    sys.stderr.write(json.dumps({"category": category, "message": message}) + "\n")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "figure":
            return cmd_figure(args)
        return _COMMANDS[args.command](_load(args), args)
    except InputError as exc:
        _error(exc.category, str(exc))
        return 1
    except (yaml.YAMLError, OSError) as exc:
        _error("input", str(exc))
        return 1
    except (ComputeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _error(getattr(exc, "category", "compute"), str(exc))
        return 2
    except FluxCoolError as exc:
        _error(exc.category, str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
