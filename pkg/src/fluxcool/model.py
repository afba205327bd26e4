"""Device parameters, drive description and the diabatic energy geometry.

Every energy and rate is stored as an angular frequency in rad*GHz
(``2*pi`` times the frequency in GHz) and every flux in milli flux quanta
(mPhi0).  Helpers :func:`ang` and :func:`to_ghz` convert between the
``x/2pi`` convention used in configuration files and the internal one.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi

# Boltzmann constant over Planck constant, GHz per kelvin.
KB_OVER_H_GHZ_PER_K = 20.8366


def ang(f_ghz):
    """Convert a frequency in GHz to an angular frequency in rad*GHz."""
    return TWO_PI * f_ghz


def to_ghz(w):
    """Convert an angular frequency in rad*GHz back to GHz."""
    return w / TWO_PI


def temperature_from_millikelvin(t_mk: float) -> float:
    """Bath temperature in mK -> thermal energy as angular frequency (rad*GHz)."""
    t_mk = float(t_mk)
    if not math.isfinite(t_mk) or t_mk <= 0.0:
        raise DomainError(f"temperature must be positive and finite, got {t_mk!r} mK")
    return TWO_PI * KB_OVER_H_GHZ_PER_K * t_mk / 1000.0


def temperature_to_millikelvin(t: float) -> float:
    return 1000.0 * t / (TWO_PI * KB_OVER_H_GHZ_PER_K)


class Waveform(str, enum.Enum):
    SYMMETRIC = "symmetric"
    ONE_SIDED = "one-sided"


class Method(str, enum.Enum):
    """Cooling protocol: ordinary symmetric drive or one-sided drive."""

    ORDINARY = "ordinary"
    NEW = "new"

    @property
    def waveform(self) -> Waveform:
        return Waveform.SYMMETRIC if self is Method.ORDINARY else Waveform.ONE_SIDED

    @classmethod
    def for_waveform(cls, waveform: Waveform) -> "Method":
        return cls.ORDINARY if Waveform(waveform) is Waveform.SYMMETRIC else cls.NEW


def _check_finite(name, value, minimum=None, strict=False):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if minimum is not None:
        bad = value <= minimum if strict else value < minimum
        if bad:
            op = ">" if strict else ">="
            raise DomainError(f"{name} must be {op} {minimum}, got {value!r}")


@dataclass(frozen=True)
class FluxQubitModel:
    """Static device and environment parameters.

    Slopes are in rad*GHz per mPhi0, gaps and rates in rad*GHz, ``phi_c`` in
    mPhi0.  The side crossovers sit at ``+phi_c`` (gap12) and ``-phi_c``
    (gap03); gap01 and gap23 sit at zero detuning.
    """

    m0: float
    m1: float
    m2: float
    m3: float
    gap01: float
    gap12: float
    gap03: float
    gap23: float
    phi_c: float
    gamma20: float
    gamma31: float
    gamma10_inter: float
    gamma2: float
    temperature: float

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            object.__setattr__(self, f.name, value)
            strict = f.name in ("temperature", "phi_c")
            _check_finite(f.name, value, 0.0, strict=strict)

    @property
    def eps_star2(self) -> float:
        """Offset of state 2 above the right-well ground state at zero flux."""
        return (self.m1 + self.m2) * self.phi_c

    @property
    def eps_star3(self) -> float:
        return (self.m0 + self.m3) * self.phi_c

    @property
    def is_mirror_symmetric(self) -> bool:
        return self.m0 == self.m1 and self.m2 == self.m3 and self.gamma20 == self.gamma31

    def level_energies(self, flux):
        """Diabatic energies (eps0, eps1, eps2, eps3) at flux detuning ``flux``.

        Left-well states (1, 3) rise with flux, right-well states (0, 2) fall.
        """
        return (
            -self.m0 * flux,
            self.m1 * flux,
            self.eps_star2 - self.m2 * flux,
            self.eps_star3 + self.m3 * flux,
        )

    def replace(self, **changes) -> "FluxQubitModel":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        payload = json.dumps({k: repr(v) for k, v in self.as_dict().items()}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


def reference_model(gamma2_ghz: float = 0.06, temperature_mk: float = 50.0) -> FluxQubitModel:
    """Device parameters of the reference experiment (weak decoherence by default)."""
    return FluxQubitModel(
        m0=ang(1.44),
        m1=ang(1.44),
        m2=ang(1.09),
        m3=ang(1.09),
        gap01=ang(0.013),
        gap12=ang(0.09),
        gap03=ang(0.09),
        gap23=ang(0.5),
        phi_c=8.4,
        gamma20=ang(0.1),
        gamma31=ang(0.1),
        gamma10_inter=ang(0.00005),
        gamma2=ang(gamma2_ghz),
        temperature=temperature_from_millikelvin(temperature_mk),
    )


@dataclass(frozen=True)
class DriveConfig:
    """Microwave flux drive.

    Symmetric: ``detuning_dc + phi_rf*sin(omega*t)``.
    One-sided: ``detuning_dc + phi_rf*(1 + sin(omega*t))``, which only ever
    moves toward positive flux and peaks at ``detuning_dc + 2*phi_rf``.
    """

    waveform: Waveform
    phi_rf: float
    omega: float
    detuning_dc: float

    def __post_init__(self):
        object.__setattr__(self, "waveform", Waveform(self.waveform))
        for name in ("phi_rf", "omega", "detuning_dc"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_finite("phi_rf", self.phi_rf, 0.0)
        _check_finite("omega", self.omega, 0.0, strict=True)
        _check_finite("detuning_dc", self.detuning_dc)

    @property
    def method(self) -> Method:
        return Method.for_waveform(self.waveform)

    @property
    def offset(self) -> float:
        """Constant term multiplying ``phi_rf`` (0 symmetric, 1 one-sided)."""
        return 0.0 if self.waveform is Waveform.SYMMETRIC else 1.0

    def flux(self, t):
        return self.detuning_dc + self.phi_rf * (self.offset + np.sin(self.omega * t))

    def excursion(self):
        """(min, max) flux reached over one period."""
        lo = self.detuning_dc + self.phi_rf * (self.offset - 1.0)
        hi = self.detuning_dc + self.phi_rf * (self.offset + 1.0)
        return lo, hi

    def replace(self, **changes) -> "DriveConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class TransitionChannel:
    """One interwell pair (left state, right state).

    ``eps`` is the dc detuning eps_left - eps_right, ``amp`` the drive energy
    amplitude and ``width`` the decoherence width of the pair.  ``slope`` is
    the sum of the two level-slope magnitudes, so ``amp = slope*phi_rf``.
    """

    left_state: int
    right_state: int
    gap: float
    eps: float
    amp: float
    width: float
    slope: float

    @property
    def label(self) -> str:
        return f"{self.left_state}{self.right_state}"

    def crossover_flux(self, detuning_dc: float) -> float:
        """Flux detuning at which ``eps`` vanishes."""
        return detuning_dc - self.eps / self.slope

    def replace(self, **changes) -> "TransitionChannel":
        return replace(self, **changes)


CHANNEL_PAIRS = ((1, 0), (1, 2), (3, 0), (3, 2))


def build_channels(model: FluxQubitModel, drive: DriveConfig) -> list[TransitionChannel]:
    """The four interwell channels (1,0), (1,2), (3,0), (3,2) at the drive's dc point."""
    m = (model.m0, model.m1, model.m2, model.m3)
    d = drive.detuning_dc
    # closed forms so that each detuning vanishes exactly at its crossover
    eps = {
        (1, 0): (model.m0 + model.m1) * d,
        (1, 2): (model.m1 + model.m2) * (d - model.phi_c),
        (3, 0): (model.m0 + model.m3) * (d + model.phi_c),
        (3, 2): (model.m2 + model.m3) * d + (model.eps_star3 - model.eps_star2),
    }
    gaps = {(1, 0): model.gap01, (1, 2): model.gap12, (3, 0): model.gap03, (3, 2): model.gap23}
    # pure dephasing plus half the intrawell decay of each excited member
    extra = {
        (1, 0): 0.0,
        (1, 2): model.gamma20 / 2.0,
        (3, 0): model.gamma31 / 2.0,
        (3, 2): (model.gamma20 + model.gamma31) / 2.0,
    }
    out = []
    for left, right in CHANNEL_PAIRS:
        slope = abs(m[left]) + abs(m[right])
        out.append(
            TransitionChannel(
                left_state=left,
                right_state=right,
                gap=gaps[left, right],
                eps=eps[left, right],
                amp=slope * drive.phi_rf,
                width=model.gamma2 + extra[left, right],
                slope=slope,
            )
        )
    return out


def channel(model: FluxQubitModel, drive: DriveConfig, left: int, right: int) -> TransitionChannel:
    for ch in build_channels(model, drive):
        if (ch.left_state, ch.right_state) == (left, right):
            return ch
    raise DomainError(f"no interwell channel ({left},{right})")


def crossover_flux(model: FluxQubitModel, left: int, right: int) -> float:
    """Flux detuning at which the diabatic levels of a channel cross."""
    if (left, right) == (1, 0):
        return 0.0
    if (left, right) == (1, 2):
        return model.phi_c
    if (left, right) == (3, 0):
        return -model.phi_c
    if (left, right) == (3, 2):
        return -(model.eps_star3 - model.eps_star2) / (model.m2 + model.m3)
    raise DomainError(f"no interwell channel ({left},{right})")
