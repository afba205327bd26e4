"""YAML run configuration: validation, unit conversion and canonical hashing.

Units in files
--------------
* slopes ``m0..m3``: GHz per mPhi0 (divided by 2*pi)
* gaps, rates, ``omega`` and ``gamma2`` values: GHz (divided by 2*pi)
* fluxes (``phi_c``, ``detuning_dc``, ``phi_rf``): mPhi0
* ``temperature_mk``: millikelvin

Everything is converted to rad*GHz on load.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, DomainError
from .model import FluxQubitModel, Method, ang, temperature_from_millikelvin
from .rates import Activation
from .sweep import AXIS_NAMES, SweepGrid, log_grid, uniform_grid

PRESETS = tuple(f"fig{k}" for k in range(3, 16))

MODEL_KEYS = (
    "m0", "m1", "m2", "m3",
    "gap01", "gap12", "gap03", "gap23",
    "phi_c", "gamma20", "gamma31", "gamma10_inter", "gamma2", "temperature_mk",
)
DRIVE_KEYS = ("detuning_dc", "phi_rf", "omega")
# keys given in GHz/2pi that become rad*GHz
_ANGULAR = {"m0", "m1", "m2", "m3", "gap01", "gap12", "gap03", "gap23",
            "gamma20", "gamma31", "gamma10_inter", "gamma2", "omega"}
_TOP_KEYS = {"model", "drive", "method", "sweep", "output", "switches", "figure"}
_FIGURE_KINDS = ("sweep", "peak_frequency")


@dataclass(frozen=True)
class AxisSpec:
    name: str
    values: np.ndarray  # internal units


@dataclass(frozen=True)
class PeakSpec:
    detuning_dc: float
    gamma2: tuple  # rad*GHz
    per_decade: int = 40
    omega_max: float | None = None  # rad*GHz; default is the decoherence width
    with_population: bool = False


@dataclass(frozen=True)
class RunConfig:
    model: FluxQubitModel
    drive: dict
    method: Method
    activation: Activation = Activation.SHIFTED_GAP
    axes: tuple = ()
    reduce_amplitude: bool = False
    output_dir: str = "."
    formats: tuple = ("csv",)
    kind: str = "sweep"
    peak: PeakSpec | None = None
    name: str = "run"
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        return canonical_hash(self.raw)

    def sweep_grid(self) -> SweepGrid:
        if not self.axes:
            raise ConfigError("sweep: no axes configured")
        axes = {a.name: a.values for a in self.axes}
        fixed = {k: v for k, v in self.drive.items() if k not in axes}
        return SweepGrid(axes=axes, fixed=fixed, method=self.method)


def canonical_hash(raw: dict) -> str:
    """sha256 of the resolved config, ignoring where and how output is written."""
    payload = {k: v for k, v in raw.items() if k != "output"}
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(text.encode()).hexdigest()


def _number(path, value, minimum=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: value must be finite, got {value!r}")
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise ConfigError(f"{path}: must be {'>' if strict else '>='} {minimum}, got {value!r}")
    return value


def _mapping(path, value):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return value


def _reject_unknown(path, section, allowed):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}: unknown key" if path else f"{extra[0]}: unknown key")


def _require(path, section, keys):
    for k in keys:
        if k not in section:
            raise ConfigError(f"{path}.{k}: missing required key")


def _parse_model(section) -> FluxQubitModel:
    section = _mapping("model", section)
    _reject_unknown("model", section, MODEL_KEYS)
    _require("model", section, MODEL_KEYS)
    values = {}
    for k in MODEL_KEYS:
        strict = k in ("phi_c", "temperature_mk")
        v = _number(f"model.{k}", section[k], 0.0, strict)
        if k == "temperature_mk":
            values["temperature"] = temperature_from_millikelvin(v)
        else:
            values[k] = ang(v) if k in _ANGULAR else v
    return FluxQubitModel(**values)


def _parse_drive(section) -> dict:
    section = _mapping("drive", section)
    _reject_unknown("drive", section, DRIVE_KEYS)
    _require("drive", section, DRIVE_KEYS)
    out = {
        "detuning_dc": _number("drive.detuning_dc", section["detuning_dc"]),
        "phi_rf": _number("drive.phi_rf", section["phi_rf"], 0.0),
        "omega": ang(_number("drive.omega", section["omega"], 0.0, strict=True)),
    }
    return out


def _parse_axis(path, name, spec) -> AxisSpec:
    spec = _mapping(path, spec)
    if "values" in spec:
        _reject_unknown(path, spec, ("values",))
        if not isinstance(spec["values"], list) or not spec["values"]:
            raise ConfigError(f"{path}.values: expected a nonempty list")
        vals = np.array([_number(f"{path}.values[{i}]", v) for i, v in enumerate(spec["values"])])
    else:
        _reject_unknown(path, spec, ("start", "stop", "step", "per_decade", "scale"))
        _require(path, spec, ("start", "stop"))
        scale = spec.get("scale", "linear")
        if scale not in ("linear", "log"):
            raise ConfigError(f"{path}.scale: must be 'linear' or 'log', got {scale!r}")
        lo = _number(f"{path}.start", spec["start"])
        hi = _number(f"{path}.stop", spec["stop"])
        if hi < lo:
            raise ConfigError(f"{path}.stop: must not be below start")
        try:
            if scale == "log":
                if "step" in spec:
                    raise ConfigError(f"{path}.step: not allowed with log scale")
                per = spec.get("per_decade", 40)
                if isinstance(per, bool) or not isinstance(per, int) or per < 1:
                    raise ConfigError(f"{path}.per_decade: expected a positive integer")
                vals = log_grid(_number(f"{path}.start", lo, 0.0, strict=True), hi, per)
            else:
                if "per_decade" in spec:
                    raise ConfigError(f"{path}.per_decade: only allowed with log scale")
                _require(path, spec, ("step",))
                vals = uniform_grid(lo, hi, _number(f"{path}.step", spec["step"], 0.0, strict=True))
        except DomainError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if np.any(np.diff(vals) <= 0.0):
        raise ConfigError(f"{path}: values must be strictly increasing")
    if name in ("omega", "gamma2"):
        if np.any(vals <= 0.0):
            raise ConfigError(f"{path}: values must be positive")
        vals = ang(vals)
    elif name == "phi_rf" and np.any(vals < 0.0):
        raise ConfigError(f"{path}: values must be nonnegative")
    return AxisSpec(name, vals)


def _parse_sweep(section):
    section = _mapping("sweep", section)
    _reject_unknown("sweep", section, ("axes", "reduce"))
    axes_raw = _mapping("sweep.axes", section.get("axes", {}))
    axes = []
    for name, spec in axes_raw.items():
        if name not in AXIS_NAMES:
            raise ConfigError(f"sweep.axes.{name}: unknown axis (valid: {', '.join(AXIS_NAMES)})")
        axes.append(_parse_axis(f"sweep.axes.{name}", name, spec))
    reduce = section.get("reduce", "none")
    if reduce not in ("none", "phi_rf"):
        raise ConfigError(f"sweep.reduce: must be 'none' or 'phi_rf', got {reduce!r}")
    if reduce == "phi_rf" and "phi_rf" not in axes_raw:
        raise ConfigError("sweep.reduce: reducing over phi_rf requires a phi_rf axis")
    return tuple(axes), reduce == "phi_rf"


def _parse_output(section):
    section = _mapping("output", section)
    _reject_unknown("output", section, ("directory", "formats"))
    directory = section.get("directory", ".")
    if not isinstance(directory, str):
        raise ConfigError("output.directory: expected a string")
    formats = section.get("formats", ["csv"])
    if not isinstance(formats, list) or not formats or any(f not in ("csv", "json") for f in formats):
        raise ConfigError("output.formats: expected a nonempty list drawn from csv, json")
    return directory, tuple(formats)


def _parse_switches(section):
    section = _mapping("switches", section)
    _reject_unknown("switches", section, ("interwell_activation",))
    value = section.get("interwell_activation", Activation.SHIFTED_GAP.value)
    try:
        return Activation(value)
    except ValueError:
        valid = ", ".join(a.value for a in Activation)
        raise ConfigError(f"switches.interwell_activation: must be one of {valid}, got {value!r}") from None


def _parse_figure(section):
    section = _mapping("figure", section)
    _reject_unknown("figure", section, ("kind", "peak"))
    kind = section.get("kind", "sweep")
    if kind not in _FIGURE_KINDS:
        raise ConfigError(f"figure.kind: must be one of {', '.join(_FIGURE_KINDS)}, got {kind!r}")
    peak = None
    if kind == "peak_frequency":
        p = _mapping("figure.peak", section.get("peak"))
        _reject_unknown("figure.peak", p, ("detuning_dc", "gamma2", "per_decade", "omega_max", "with_population"))
        _require("figure.peak", p, ("detuning_dc", "gamma2"))
        g = p["gamma2"]
        if not isinstance(g, list) or not g:
            raise ConfigError("figure.peak.gamma2: expected a nonempty list")
        per = p.get("per_decade", 40)
        if isinstance(per, bool) or not isinstance(per, int) or per < 1:
            raise ConfigError("figure.peak.per_decade: expected a positive integer")
        omax = p.get("omega_max")
        with_pop = p.get("with_population", False)
        if not isinstance(with_pop, bool):
            raise ConfigError("figure.peak.with_population: expected true or false")
        peak = PeakSpec(
            detuning_dc=_number("figure.peak.detuning_dc", p["detuning_dc"]),
            gamma2=tuple(ang(_number(f"figure.peak.gamma2[{i}]", v, 0.0, True)) for i, v in enumerate(g)),
            per_decade=per,
            omega_max=None if omax is None else ang(_number("figure.peak.omega_max", omax, 0.0, True)),
            with_population=with_pop,
        )
    return kind, peak


def parse_config(raw: dict, name: str = "run") -> RunConfig:
    """Validate a decoded config mapping and convert units."""
    raw = _mapping("<root>", raw)
    _reject_unknown("", raw, _TOP_KEYS)
    _require("<root>", raw, ("model", "drive", "method"))
    model = _parse_model(raw["model"])
    drive = _parse_drive(raw["drive"])
    try:
        method = Method(raw["method"])
    except ValueError:
        raise ConfigError(f"method: must be 'ordinary' or 'new', got {raw['method']!r}") from None
    axes, reduce = _parse_sweep(raw["sweep"]) if "sweep" in raw else ((), False)
    out_dir, formats = _parse_output(raw["output"]) if "output" in raw else (".", ("csv",))
    activation = _parse_switches(raw["switches"]) if "switches" in raw else Activation.SHIFTED_GAP
    kind, peak = _parse_figure(raw["figure"]) if "figure" in raw else ("sweep", None)
    resolved = dict(raw)
    resolved.setdefault("switches", {})
    resolved["switches"] = {"interwell_activation": activation.value}
    return RunConfig(
        model=model,
        drive=drive,
        method=method,
        activation=activation,
        axes=axes,
        reduce_amplitude=reduce,
        output_dir=out_dir,
        formats=formats,
        kind=kind,
        peak=peak,
        name=name,
        raw=resolved,
    )


def load_config(path) -> RunConfig:
    """Read and validate a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    return parse_config(raw, name=path.stem)


def preset_path(name: str):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    return resources.files("fluxcool") / "presets" / f"{name}.yaml"


def load_preset(name: str) -> RunConfig:
    path = preset_path(name)
    raw = yaml.safe_load(path.read_text())
    return parse_config(raw, name=name)
