"""Transition rates and the four-state rate generator.

Photon-assisted (driven Landau-Zener) rates are Bessel-weighted sums of
Lorentzians,

    W = gap**2/2 * sum_n width * J_n(A/omega)**2 / ((e - n*omega)**2 + width**2)

with ``e = eps`` for the symmetric drive and ``e = eps + A`` for the
one-sided drive (the mean flux is shifted by ``phi_rf``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from . import specfun
from .errors import ComputeError, DomainError, NotReachedError, SingularInputError, ValidityError
from .model import DriveConfig, FluxQubitModel, Method, TransitionChannel, Waveform, build_channels, crossover_flux

AIRY_MIN_ARGUMENT = 10.0

# Truncation rule constants: N = ceil((|e|+A)/w) + ceil(C_TURN*(A/w)^(1/3))
#                                + C_TAIL*ceil(width/w) + C_PAD
TRUNCATION_RULE = {"turning": 10, "tail": 50, "pad": 100}


class Activation(str, enum.Enum):
    """Up-rate activation energy used with the one-sided drive."""

    SHIFTED_GAP = "shifted-gap"
    LITERAL = "literal-paper"


def truncation_order(e: float, amp: float, width: float, omega: float) -> int:
    """Photon-index cutoff N for a sum over n in [-N, N]."""
    x = amp / omega
    return int(
        math.ceil((abs(e) + amp) / omega)
        + math.ceil(TRUNCATION_RULE["turning"] * x ** (1.0 / 3.0))
        + TRUNCATION_RULE["tail"] * math.ceil(width / omega)
        + TRUNCATION_RULE["pad"]
    )


@dataclass(frozen=True)
class LZResult:
    probability: float
    sweep_rate: float
    phase: float
    time: float
    adiabatic_limit: bool = False


def lz_probability(model: FluxQubitModel, drive: DriveConfig, channel: TransitionChannel) -> LZResult:
    """Single-passage Landau-Zener probability at the first crossing of a period.

    The relative-energy sweep rate is ``slope*omega*phi_rf*|cos(omega*t0)|``
    where ``t0`` is the first time in ``[0, 2pi/omega)`` at which the drive
    reaches the channel's crossover.
    """
    target = crossover_flux(model, channel.left_state, channel.right_state)
    lo, hi = drive.excursion()
    if not lo <= target <= hi:
        raise NotReachedError(
            f"channel {channel.label}: crossover at {target:g} mPhi0 outside excursion [{lo:g}, {hi:g}]"
        )
    if drive.phi_rf == 0.0:
        # parked exactly on the crossover: infinitely slow passage
        return LZResult(1.0 if channel.gap > 0 else 0.0, 0.0, 0.0, 0.0, adiabatic_limit=True)
    s = (target - drive.detuning_dc) / drive.phi_rf - drive.offset
    s = min(1.0, max(-1.0, s))
    theta = math.asin(s)
    if theta < 0.0:
        # solutions in [0, 2pi): pi - theta and 2pi + theta; the first is smaller
        theta = math.pi - theta
    cos_t = math.sqrt(max(0.0, 1.0 - s * s))
    zeta = channel.slope * drive.omega * drive.phi_rf * cos_t
    t0 = theta / drive.omega
    if channel.gap == 0.0:
        return LZResult(0.0, zeta, theta, t0)
    if zeta == 0.0:
        return LZResult(1.0, 0.0, theta, t0, adiabatic_limit=True)
    p = -math.expm1(-channel.gap**2 / (4.0 * zeta))
    return LZResult(p, zeta, theta, t0)


def static_rate(channel: TransitionChannel) -> float:
    """Undriven incoherent tunneling rate (a single Lorentzian)."""
    if channel.width == 0.0 and channel.eps == 0.0:
        raise SingularInputError(f"channel {channel.label}: zero width at zero detuning")
    # same operation order as the photon sum, so zero drive reproduces it bit-for-bit
    w = channel.width
    return channel.gap * channel.gap / 2.0 * (1.0 * 1.0 * w / (channel.eps * channel.eps + w * w))


@numba.njit(cache=True, nogil=True)
def _photon_sum(j, e, omega, width, n_terms):
    # orders n and -n share J_n^2; pairing them makes the sum exactly even in e
    w2 = width * width
    total = j[0] * j[0] * width / (e * e + w2)
    top = min(n_terms, j.size - 1)
    for n in range(1, top + 1):
        a = e - n * omega
        b = e + n * omega
        total += j[n] * j[n] * (width / (a * a + w2) + width / (b * b + w2))
    return total


def _effective_detuning(channel: TransitionChannel, waveform: Waveform) -> float:
    return channel.eps + channel.amp if Waveform(waveform) is Waveform.ONE_SIDED else channel.eps


def _check_omega(omega):
    if not math.isfinite(omega) or omega <= 0.0:
        raise DomainError(f"omega must be positive, got {omega!r}")


def photon_sum_rate(gap: float, e: float, amp: float, width: float, omega: float, n_terms: int | None = None) -> float:
    """Symmetric-drive photon-assisted rate for raw channel numbers."""
    _check_omega(omega)
    if width <= 0.0:
        raise SingularInputError("decoherence width must be positive for a driven rate")
    if n_terms is None:
        n_terms = truncation_order(e, amp, width, omega)
    if gap == 0.0:
        return 0.0
    j = specfun.canonical_table(amp / omega)
    return gap * gap / 2.0 * _photon_sum(j, float(e), float(omega), float(width), int(n_terms))


def mdlz_rate(channel: TransitionChannel, waveform: Waveform, omega: float, n_terms: int | None = None) -> float:
    """Driven interwell rate of one channel (identical in both directions)."""
    e = _effective_detuning(channel, waveform)
    return photon_sum_rate(channel.gap, e, channel.amp, channel.width, omega, n_terms)


@numba.njit(cache=True, nogil=True)
def _airy_sum(e, amp, omega, width, n_terms, u):
    x = amp / omega
    scale = (2.0 * omega / amp) ** (1.0 / 3.0)
    pref = scale * scale
    total = 0.0
    for n in range(-n_terms, n_terms + 1):
        # reflection J_{-n}^2 = J_n^2 carried over to the Airy form
        ai = specfun._ai_scalar(scale * (abs(n) - x), u)
        d = e - n * omega
        total += pref * ai * ai / (d * d / width + width)
    return total


def _check_airy_regime(channel, omega):
    _check_omega(omega)
    if channel.amp / omega < AIRY_MIN_ARGUMENT:
        raise ValidityError(
            f"Airy approximation needs A/omega >= {AIRY_MIN_ARGUMENT:g}, got {channel.amp / omega:.4g}"
        )


def airy_rate(channel: TransitionChannel, omega: float, n_terms: int | None = None) -> float:
    """One-sided-drive rate with J_n replaced by its uniform Airy approximation."""
    _check_airy_regime(channel, omega)
    e = channel.eps + channel.amp
    if n_terms is None:
        n_terms = truncation_order(e, channel.amp, channel.width, omega)
    total = _airy_sum(e, channel.amp, omega, channel.width, int(n_terms), specfun._U)
    return channel.gap**2 / 2.0 * total


def airy_three_term_parts(
    channel: TransitionChannel, omega: float, waveform: Waveform = Waveform.ONE_SIDED
) -> tuple[float, float]:
    """(resonant term, sum of the two neighbouring terms) of the three-term form.

    The detuning enters measured from the drive turning point,
    ``|e| - A`` with ``e`` the waveform's effective detuning.
    """
    _check_airy_regime(channel, omega)
    a = channel.amp
    g = channel.width
    e = abs(_effective_detuning(channel, waveform)) - a
    scale = (2.0 * omega / a) ** (1.0 / 3.0)
    ai0 = specfun.airy_ai(scale * e / omega)
    aim = specfun.airy_ai(scale * (e - omega) / omega)
    aip = specfun.airy_ai(scale * (e + omega) / omega)
    d2 = channel.gap**2
    center = d2 * (omega**2 / (2.0 * a**2)) ** (1.0 / 3.0) * ai0**2 / g
    side = d2 * (1.0 / (2.0 * a**2)) ** (1.0 / 3.0) / (omega ** (4.0 / 3.0) / g + g / omega ** (2.0 / 3.0))
    return center, side * (aim**2 + aip**2)


def airy_three_term(channel: TransitionChannel, omega: float, waveform: Waveform = Waveform.ONE_SIDED) -> float:
    """Three dominant Airy terms around the resonant photon number.

    Qualitative only; never used by the dynamics.
    """
    center, sides = airy_three_term_parts(channel, omega, waveform)
    return center + sides


def _activation_energy(model, drive, activation):
    ch = {(c.left_state, c.right_state): c for c in build_channels(model, drive)}
    if drive.method is Method.ORDINARY:
        return ch[1, 0].eps
    if Activation(activation) is Activation.SHIFTED_GAP:
        return ch[1, 0].eps + ch[1, 0].amp
    return ch[1, 2].eps - ch[1, 2].amp


def _boltzmann(rate, exponent):
    try:
        return rate * math.exp(exponent)
    except OverflowError:
        raise ComputeError(f"activation factor exp({exponent:.4g}) overflows") from None


def interwell_rates(
    model: FluxQubitModel, drive: DriveConfig, activation: Activation = Activation.SHIFTED_GAP
) -> tuple[float, float]:
    """Thermal (down, up) rates between |1> and |0>, i.e. (1->0, 0->1).

    Ordinary drive: detailed balance with the signed splitting eps10.  The
    downhill direction relaxes at ``gamma10_inter`` and the uphill one is
    Boltzmann suppressed, so the pair is mirror symmetric in the detuning.
    One-sided drive: the activation energy is the splitting at the mean flux
    (``eps10 + A10``), or the literal ``eps12 - A12`` form when requested; the
    literal form is applied verbatim as an up rate with the down rate fixed.
    """
    t = model.temperature
    if t <= 0.0:
        raise DomainError("temperature must be positive")
    g = model.gamma10_inter
    energy = _activation_energy(model, drive, activation)
    if drive.method is Method.NEW and Activation(activation) is Activation.LITERAL:
        return g, _boltzmann(g, -energy / t)
    if energy >= 0.0:
        return g, _boltzmann(g, -energy / t)
    return _boltzmann(g, energy / t), g


def interwell_up_rate(
    model: FluxQubitModel, drive: DriveConfig, activation: Activation = Activation.SHIFTED_GAP
) -> float:
    """Thermal up rate from |0> to |1>; see :func:`interwell_rates`."""
    return interwell_rates(model, drive, activation)[1]


@dataclass(frozen=True)
class RateSet:
    """Rates entering the generator (all rad*GHz, driven rates symmetric)."""

    w01: float
    w12: float
    w03: float
    w23: float
    gamma20: float
    gamma31: float
    gamma10_inter: float
    gamma01_inter: float
    method: Method

    # reverse-direction aliases; driven rates are the same both ways
    @property
    def w10(self):
        return self.w01

    @property
    def w21(self):
        return self.w12

    @property
    def w30(self):
        return self.w03

    @property
    def w32(self):
        return self.w23

    def as_dict(self) -> dict:
        return {
            "w01": self.w01,
            "w12": self.w12,
            "w03": self.w03,
            "w23": self.w23,
            "gamma20": self.gamma20,
            "gamma31": self.gamma31,
            "gamma10_inter": self.gamma10_inter,
            "gamma01_inter": self.gamma01_inter,
            "method": self.method.value,
        }


@dataclass(frozen=True)
class GeneratorMatrix:
    """``dp/dt = g @ p`` for p = (p00, p11, p22, p33); columns sum to zero."""

    g: np.ndarray
    eps10: float | None = None
    rates: RateSet | None = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.shape != (4, 4):
            raise DomainError(f"generator must be 4x4, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ComputeError("generator has non-finite entries")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def check(self, atol: float = 1e-12) -> None:
        """Raise if the generator invariants are violated."""
        g = self.g
        scale = max(1.0, float(np.max(np.abs(g))))
        off = g - np.diag(np.diag(g))
        if np.any(off < 0.0) or np.any(np.diag(g) > 0.0):
            raise DomainError("generator has negative off-diagonal or positive diagonal entries")
        if np.max(np.abs(g.sum(axis=0))) > atol * scale:
            raise DomainError("generator columns do not sum to zero")


def generator_from_rates(r: RateSet, eps10: float | None = None) -> GeneratorMatrix:
    """Four-state generator: intrawell decay 2->0, 3->1, driven interwell
    exchange on every channel and thermal exchange between 0 and 1."""
    g = np.zeros((4, 4))
    g[0, 1] = r.gamma10_inter + r.w10
    g[0, 2] = r.gamma20
    g[0, 3] = r.w30
    g[1, 0] = r.gamma01_inter + r.w01
    g[1, 2] = r.w21
    g[1, 3] = r.gamma31
    g[2, 1] = r.w12
    g[2, 3] = r.w32
    g[3, 0] = r.w03
    g[3, 2] = r.w23
    for k in range(4):
        g[k, k] = -(g[:, k].sum())
    return GeneratorMatrix(g, eps10=eps10, rates=r)


def compute_rates(
    model: FluxQubitModel, drive: DriveConfig, activation: Activation = Activation.SHIFTED_GAP
) -> RateSet:
    ch = {(c.left_state, c.right_state): c for c in build_channels(model, drive)}
    w = {key: mdlz_rate(c, drive.waveform, drive.omega) for key, c in ch.items()}
    down, up = interwell_rates(model, drive, activation)
    return RateSet(
        w01=w[1, 0],
        w12=w[1, 2],
        w03=w[3, 0],
        w23=w[3, 2],
        gamma20=model.gamma20,
        gamma31=model.gamma31,
        gamma10_inter=down,
        gamma01_inter=up,
        method=drive.method,
    )


def assemble_generator(
    model: FluxQubitModel, drive: DriveConfig, activation: Activation = Activation.SHIFTED_GAP
) -> GeneratorMatrix:
    """Rate generator for a model under a drive; ``.rates`` holds the RateSet."""
    rates = compute_rates(model, drive, activation)
    eps10 = (model.m0 + model.m1) * drive.detuning_dc
    return generator_from_rates(rates, eps10=eps10)
