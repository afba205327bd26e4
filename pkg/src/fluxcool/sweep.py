"""Grid sweeps, optimal-amplitude extraction and the W12 peak-frequency scan.

Grid cells are independent.  They may be evaluated by several threads (the
numerical kernels release the GIL), but every cell is computed the same way
regardless of scheduling, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import datetime as _dt
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rates as _rates
from .dynamics import equilibrium_p11, steady_state
from .errors import DomainError, FluxCoolError, SweepFailedError
from .model import DriveConfig, FluxQubitModel, Method, ang, build_channels

AXIS_NAMES = ("detuning_dc", "phi_rf", "omega", "gamma2")
AXIS_UNITS = {"detuning_dc": "mPhi0", "phi_rf": "mPhi0", "omega": "rad*GHz", "gamma2": "rad*GHz"}

# amplitude grids are snapped to this many decimals so that refined grids
# reproduce the coarse grid's points exactly
_GRID_DECIMALS = 10


def uniform_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0.0 or hi < lo:
        raise DomainError(f"bad grid: [{lo}, {hi}] step {step}")
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), _GRID_DECIMALS)


def log_grid(lo: float, hi: float, per_decade: int = 40) -> np.ndarray:
    """Log-spaced points from lo to hi inclusive, ``per_decade`` per decade."""
    if lo <= 0.0 or hi < lo:
        raise DomainError(f"bad log grid: [{lo}, {hi}]")
    n = max(1, int(math.ceil(per_decade * math.log10(hi / lo))))
    return np.logspace(math.log10(lo), math.log10(hi), n + 1)


@dataclass(frozen=True)
class SweepGrid:
    """Axes (ordered, strictly increasing) plus fixed values for the rest."""

    axes: dict
    fixed: dict
    method: Method = Method.ORDINARY

    def __post_init__(self):
        axes = {}
        for name, values in self.axes.items():
            if name not in AXIS_NAMES:
                raise DomainError(f"unknown sweep axis {name!r}")
            arr = np.asarray(values, dtype=float).ravel()
            if arr.size == 0:
                raise DomainError(f"axis {name!r} is empty")
            if np.any(np.diff(arr) <= 0.0):
                raise DomainError(f"axis {name!r} must be strictly increasing")
            arr.setflags(write=False)
            axes[name] = arr
        fixed = {k: float(v) for k, v in self.fixed.items()}
        for name in fixed:
            if name not in AXIS_NAMES:
                raise DomainError(f"unknown fixed parameter {name!r}")
            if name in axes:
                raise DomainError(f"{name!r} is both an axis and fixed")
        missing = [n for n in AXIS_NAMES if n not in axes and n not in fixed and n != "gamma2"]
        if missing:
            raise DomainError(f"sweep grid lacks values for {missing}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "method", Method(self.method))

    @property
    def names(self) -> tuple:
        return tuple(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes.values())

    def point(self, index: tuple) -> dict:
        values = dict(self.fixed)
        for (name, arr), i in zip(self.axes.items(), index):
            values[name] = float(arr[i])
        return values


@dataclass
class SweepResult:
    grid: SweepGrid
    p11: np.ndarray
    failed: np.ndarray
    failures: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def minimize(self, axis: str = "phi_rf"):
        """Minimum of p11 over one axis, the minimizing coordinate and edge flags.

        Ties go to the smaller coordinate; failed cells are ignored.
        """
        k = self.grid.names.index(axis)
        coords = self.grid.axes[axis]
        data = np.where(self.failed, np.inf, self.p11)
        moved = np.moveaxis(data, k, -1)
        idx = np.argmin(moved, axis=-1)
        best = np.take_along_axis(moved, idx[..., None], axis=-1)[..., 0]
        best = np.where(np.isinf(best), np.nan, best)
        edge = (idx == 0) | (idx == coords.size - 1)
        return best, coords[idx], edge


def _cell_p11(model, values, method, activation):
    m = model if "gamma2" not in values else model.replace(gamma2=values["gamma2"])
    drive = DriveConfig(method.waveform, values["phi_rf"], values["omega"], values["detuning_dc"])
    gen = _rates.assemble_generator(m, drive, activation)
    return steady_state(gen).p11


def _evaluate(model, grid, activation, flat_indices):
    out = []
    for flat in flat_indices:
        index = np.unravel_index(flat, grid.shape)
        try:
            out.append((flat, _cell_p11(model, grid.point(index), grid.method, activation), None))
        except FluxCoolError as exc:
            out.append((flat, math.nan, (exc.category, str(exc))))
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            out.append((flat, math.nan, ("compute", str(exc))))
    return out


def _chunks(n, parts):
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts)]


def truncation_metadata() -> dict:
    return {
        "rule": "N = ceil((|e|+A)/omega) + ceil(turning*(A/omega)^(1/3)) + tail*ceil(width/omega) + pad",
        **_rates.TRUNCATION_RULE,
    }


def run_sweep(
    model: FluxQubitModel,
    grid: SweepGrid,
    workers: int = 1,
    activation: _rates.Activation = _rates.Activation.SHIFTED_GAP,
) -> SweepResult:
    """Steady-state p11 at every grid point.

    Per-cell failures are recorded (cell flagged, value NaN) rather than
    aborting the sweep.
    """
    total = int(np.prod(grid.shape))
    p11 = np.full(total, np.nan)
    failed = np.zeros(total, dtype=bool)
    failures = []
    jobs = _chunks(total, 4 * max(1, workers))
    if workers <= 1:
        batches = [_evaluate(model, grid, activation, j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda j: _evaluate(model, grid, activation, j), jobs))
    for batch in batches:
        for flat, value, err in batch:
            p11[flat] = value
            if err is not None:
                failed[flat] = True
                index = tuple(int(i) for i in np.unravel_index(flat, grid.shape))
                failures.append({"index": index, "category": err[0], "message": err[1]})
    metadata = {
        "model_hash": model.digest(),
        "method": grid.method.value,
        "activation": _rates.Activation(activation).value,
        "truncation": truncation_metadata(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return SweepResult(grid, p11.reshape(grid.shape), failed.reshape(grid.shape), failures, metadata)


@dataclass(frozen=True)
class OptimalPoint:
    phi_rf_star: float
    omega_star: float
    p11_star: float
    at_edge: bool
    detuning_dc: float
    amplitudes: np.ndarray
    p11: np.ndarray

    @property
    def interior(self) -> bool:
        return not self.at_edge


def predicted_amplitude(model: FluxQubitModel, detuning_dc: float, method: Method) -> float:
    """Amplitude at which the drive just reaches the 1-2 crossover."""
    reach = model.phi_c - detuning_dc
    return reach if Method(method) is Method.ORDINARY else reach / 2.0


def default_amplitude_grid(
    model: FluxQubitModel,
    detuning_dc: float,
    method: Method,
    span: float = 2.0,
    fine_halfwidth: float = 0.5,
    fine_step: float = 0.01,
    coarse_step: float = 0.05,
) -> np.ndarray:
    """Fine steps near the predicted optimum, coarse steps out to ``span``."""
    center = round(predicted_amplitude(model, detuning_dc, method), 2)
    lo = max(0.0, center - span)
    hi = center + span
    fine = uniform_grid(max(lo, center - fine_halfwidth), center + fine_halfwidth, fine_step)
    coarse = uniform_grid(lo, hi, coarse_step)
    grid = np.union1d(np.round(coarse, _GRID_DECIMALS), fine)
    return grid[grid >= 0.0]


def scan_amplitudes(
    model: FluxQubitModel,
    detuning_dc: float,
    omega: float,
    method: Method,
    amplitudes,
    workers: int = 1,
    activation: _rates.Activation = _rates.Activation.SHIFTED_GAP,
) -> SweepResult:
    grid = SweepGrid(
        axes={"phi_rf": np.asarray(amplitudes, dtype=float)},
        fixed={"detuning_dc": detuning_dc, "omega": omega},
        method=method,
    )
    return run_sweep(model, grid, workers=workers, activation=activation)


def optimal_amplitude(
    model: FluxQubitModel,
    detuning_dc: float,
    omega: float,
    method: Method,
    amp_range: tuple | None = None,
    amp_step: float | None = None,
    workers: int = 1,
    activation: _rates.Activation = _rates.Activation.SHIFTED_GAP,
) -> OptimalPoint:
    """Amplitude minimizing p11 on a grid (ties toward smaller amplitude).

    Without ``amp_range`` the default two-resolution grid around the
    predicted optimum is used.
    """
    method = Method(method)
    if amp_range is None:
        amps = default_amplitude_grid(model, detuning_dc, method)
    else:
        lo, hi = amp_range
        if hi < lo:
            raise DomainError("amp_range is empty")
        amps = uniform_grid(lo, hi, amp_step or 0.01)
    res = scan_amplitudes(model, detuning_dc, omega, method, amps, workers, activation)
    if res.failed.all():
        raise SweepFailedError(f"all {amps.size} amplitude cells failed: {res.failures[0]['message']}")
    best, arg, edge = res.minimize("phi_rf")
    return OptimalPoint(
        phi_rf_star=float(arg),
        omega_star=float(omega),
        p11_star=float(best),
        at_edge=bool(edge),
        detuning_dc=float(detuning_dc),
        amplitudes=amps,
        p11=res.p11,
    )


@dataclass(frozen=True)
class AmplitudeFit:
    slope: float
    intercept: float
    max_residual: float
    detunings: np.ndarray
    amplitudes: np.ndarray
    residuals: np.ndarray
    p11_star: np.ndarray
    at_edge: np.ndarray


def fit_amplitude_condition(
    model: FluxQubitModel,
    detuning_list,
    omega: float,
    method: Method,
    amp_step: float | None = None,
    halfwidth: float | None = None,
    workers: int = 1,
    activation: _rates.Activation = _rates.Activation.SHIFTED_GAP,
) -> AmplitudeFit:
    """Least-squares line through the optimal amplitude at each detuning."""
    detunings = np.unique(np.asarray(detuning_list, dtype=float))
    if detunings.size < 3:
        raise DomainError("need at least three distinct detunings")
    opts = []
    for d in detunings:
        if halfwidth is None:
            opts.append(optimal_amplitude(model, d, omega, method, workers=workers, activation=activation))
        else:
            c = predicted_amplitude(model, d, method)
            rng = (max(0.0, round(c - halfwidth, 2)), round(c + halfwidth, 2))
            opts.append(optimal_amplitude(model, d, omega, method, rng, amp_step, workers, activation))
    amps = np.array([o.phi_rf_star for o in opts])
    slope, intercept = np.polyfit(detunings, amps, 1)
    resid = amps - (slope * detunings + intercept)
    return AmplitudeFit(
        slope=float(slope),
        intercept=float(intercept),
        max_residual=float(np.max(np.abs(resid))),
        detunings=detunings,
        amplitudes=amps,
        residuals=resid,
        p11_star=np.array([o.p11_star for o in opts]),
        at_edge=np.array([o.at_edge for o in opts]),
    )


@dataclass(frozen=True)
class PeakFrequency:
    omega_peak: float
    w12_peak: float
    omegas: np.ndarray
    envelope: np.ndarray
    best_amplitudes: np.ndarray
    at_edge: bool


def w12_one_sided(model: FluxQubitModel, detuning_dc: float, phi_rf: float, omega: float) -> float:
    drive = DriveConfig(Method.NEW.waveform, phi_rf, omega, detuning_dc)
    ch = build_channels(model, drive)[1]
    return _rates.mdlz_rate(ch, drive.waveform, omega)


def default_peak_omegas(model: FluxQubitModel, per_decade: int = 40) -> np.ndarray:
    """Log grid from 1 MHz up to the 1-2 decoherence width (incoherent region)."""
    width = model.gamma2 + model.gamma20 / 2.0
    return log_grid(ang(0.001), max(width, ang(0.002)), per_decade)


def max_w12_over_amplitude(
    model: FluxQubitModel, detuning_dc: float, omega: float, amplitudes, refine_step: float | None = 0.001
):
    """Largest one-sided W12 over an amplitude grid, refined around the best cell."""
    amps = np.asarray(amplitudes, dtype=float)
    vals = np.array([w12_one_sided(model, detuning_dc, a, omega) for a in amps])
    i = int(np.argmax(vals))
    best_a, best_w = float(amps[i]), float(vals[i])
    if refine_step and amps.size > 1:
        lo = amps[max(i - 1, 0)]
        hi = amps[min(i + 1, amps.size - 1)]
        for a in uniform_grid(lo, hi, refine_step):
            w = w12_one_sided(model, detuning_dc, float(a), omega)
            if w > best_w:
                best_a, best_w = float(a), w
    return best_w, best_a


def peak_w12_frequency(
    model: FluxQubitModel,
    detuning_dc: float,
    gamma2: float,
    omega_range=None,
    amplitudes=None,
    workers: int = 1,
) -> PeakFrequency:
    """Frequency maximizing the amplitude-optimized one-sided W12.

    ``omega_range`` defaults to :func:`default_peak_omegas`; ``amplitudes``
    defaults to a 0.01 mPhi0 grid from just below the reach amplitude,
    refined to 0.001 around the best cell.
    """
    m = model.replace(gamma2=gamma2)
    omegas = default_peak_omegas(m) if omega_range is None else np.asarray(omega_range, dtype=float)
    if omegas.size == 0:
        raise DomainError("omega_range is empty")
    if amplitudes is None:
        c = predicted_amplitude(m, detuning_dc, Method.NEW)
        amplitudes = uniform_grid(round(c - 0.1, 2), round(c + 0.5, 2), 0.01)

    def one(w):
        return max_w12_over_amplitude(m, detuning_dc, float(w), amplitudes)

    if workers <= 1:
        pairs = [one(w) for w in omegas]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(one, omegas))
    env = np.array([p[0] for p in pairs])
    best_amps = np.array([p[1] for p in pairs])
    k = int(np.argmax(env))
    return PeakFrequency(
        omega_peak=float(omegas[k]),
        w12_peak=float(env[k]),
        omegas=omegas,
        envelope=env,
        best_amplitudes=best_amps,
        at_edge=k in (0, omegas.size - 1),
    )


def equilibrium_reference(model: FluxQubitModel, detuning_dc: float) -> float:
    return equilibrium_p11((model.m0 + model.m1) * detuning_dc, model.temperature)
