"""Bessel J_n tables for large arguments and the Airy function Ai.

The Bessel kernel runs Miller's downward recurrence once per argument and
normalizes with the sum rule ``J0**2 + 2*sum(Jn**2) = 1``; the sign is fixed
with ``J0 + 2*sum(J2k) = 1``.  One pass yields every order up to the
turning-point region, which is all a photon-assisted sum ever needs.

Tables are computed to a canonical order that depends on ``x`` only, so a
value never depends on what was requested before it (the LRU cache stays
invisible to callers).
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError

_RESCALE = 1e100


def coverage_order(x: float) -> int:
    """Order beyond which J_n(x) is below 1e-15 (treated as exactly zero)."""
    return int(math.ceil(x) + 12 * math.ceil(x ** (1.0 / 3.0)) + 20)


@numba.njit(cache=True, nogil=True)
def _miller(x, n_keep):
    out = np.zeros(n_keep + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    if x < 1e-3:
        # leading power-series terms; the recurrence would overflow here
        h = 0.5 * x
        lead = 1.0
        for n in range(n_keep + 1):
            if n > 0:
                lead *= h / n
            if lead == 0.0:
                break
            out[n] = lead * (1.0 - h * h / (n + 1) + h ** 4 / (2.0 * (n + 1) * (n + 2)))
        return out
    start = n_keep + 30 + int(math.sqrt(40.0 * n_keep))
    buf = np.zeros(start + 2)
    buf[start] = 1e-300
    for k in range(start, 0, -1):
        v = 2.0 * k / x * buf[k] - buf[k + 1]
        buf[k - 1] = v
        if abs(v) > _RESCALE:
            for q in range(k - 1, start + 1):
                buf[q] /= _RESCALE
    peak = 0.0
    for k in range(start + 1):
        a = abs(buf[k])
        if a > peak:
            peak = a
    ss = (buf[0] / peak) ** 2
    even = buf[0] / peak
    for k in range(1, start + 1):
        v = buf[k] / peak
        ss += 2.0 * v * v
        if k % 2 == 0:
            even += 2.0 * v
    norm = 1.0 / (peak * math.sqrt(ss))
    if even < 0.0:
        norm = -norm
    for k in range(n_keep + 1):
        out[k] = buf[k] * norm
    return out


@dataclass(frozen=True)
class BesselTable:
    """J_n(x) for n = 0..n_max.  Negative orders follow J_{-n}^2 = J_n^2."""

    x: float
    values: np.ndarray
    n_max: int

    def __getitem__(self, n):
        return self.values[n]

    def squares(self) -> np.ndarray:
        return self.values * self.values

    def sum_rule(self) -> float:
        """J0^2 + 2 sum_{n>=1} J_n^2, equal to 1 for a complete table."""
        v = self.values
        return float(v[0] * v[0] + 2.0 * np.dot(v[1:], v[1:]))


class _TableCache:
    """Thread-safe LRU of canonical tables keyed by the argument's bits."""

    def __init__(self, maxsize=64):
        self.maxsize = maxsize
        self._data = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, x):
        key = float(x).hex()
        with self._lock:
            arr = self._data.get(key)
            if arr is not None:
                self._data.move_to_end(key)
                self.hits += 1
                return arr
            self.misses += 1
        arr = _miller(float(x), coverage_order(x))
        arr.setflags(write=False)
        with self._lock:
            self._data[key] = arr
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return arr

    def clear(self):
        with self._lock:
            self._data.clear()
            self.hits = self.misses = 0

    def __len__(self):
        return len(self._data)


_cache = _TableCache()


def set_cache_size(maxsize: int) -> None:
    if maxsize < 1:
        raise DomainError("cache size must be at least 1")
    _cache.maxsize = int(maxsize)


def clear_cache() -> None:
    _cache.clear()


def cache_info() -> dict:
    return {"size": len(_cache), "maxsize": _cache.maxsize, "hits": _cache.hits, "misses": _cache.misses}


def _check_argument(x):
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"Bessel argument must be finite and nonnegative, got {x!r}")
    return x


def canonical_table(x: float) -> np.ndarray:
    """Read-only J_n(x) array up to :func:`coverage_order` (cached)."""
    return _cache.get(_check_argument(x))


def bessel_j_array(x: float, n_max: int, use_cache: bool = True) -> BesselTable:
    """J_n(x) for all n in 0..n_max by normalized downward recurrence.

    The returned table extends to at least :func:`coverage_order` so that the
    sum rule holds; orders beyond the recurrence start are exactly zero.
    """
    x = _check_argument(x)
    if int(n_max) < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max!r}")
    base = _cache.get(x) if use_cache else _miller(x, coverage_order(x))
    n_max = max(int(n_max), coverage_order(x))
    values = np.zeros(n_max + 1)
    values[: base.size] = base[: n_max + 1]
    return BesselTable(x=x, values=values, n_max=n_max)


# --- Airy Ai -------------------------------------------------------------

_AI0 = 0.355028053887817239260  # Ai(0)
_AIP0 = 0.258819403792806798405  # -Ai'(0)
# series on [-7, 6]; asymptotic expansions outside
_SERIES_NEG = -7.0
_SERIES_POS = 6.0
_ASYM_TERMS = 40


@numba.njit(cache=True, nogil=True)
def _ai_series(z):
    # Maclaurin series: Ai = Ai(0) f(z) - |Ai'(0)| g(z)
    z3 = z * z * z
    f = 1.0
    g = z
    tf = 1.0
    tg = z
    k = 1
    while True:
        tf *= z3 / ((3 * k - 1) * (3 * k))
        tg *= z3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if abs(tf) < 1e-18 * abs(f) and abs(tg) < 1e-18 * (abs(g) + 1e-300):
            break
        k += 1
        if k > 500:
            break
    return _AI0 * f - _AIP0 * g


@numba.njit(cache=True, nogil=True)
def _u_coeffs(n):
    u = np.empty(n)
    u[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


@numba.njit(cache=True, nogil=True)
def _ai_asymptotic(z, u):
    if z > 0.0:
        zeta = 2.0 / 3.0 * z ** 1.5
        if zeta > 700.0:
            return 0.0
        s = 0.0
        term_prev = 1e300
        sign = 1.0
        p = 1.0
        for k in range(u.size):
            term = u[k] / p
            if term > term_prev:
                break
            s += sign * term
            term_prev = term
            sign = -sign
            p *= zeta
        return math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * z ** 0.25) * s
    x = -z
    zeta = 2.0 / 3.0 * x ** 1.5
    # P and Q collect even and odd terms of the same divergent series
    pp = 0.0
    qq = 0.0
    p = 1.0
    term_prev = 1e300
    for k in range(u.size):
        term = u[k] / p
        if term > term_prev:
            break
        term_prev = term
        if k % 2 == 0:
            pp += term if (k // 2) % 2 == 0 else -term
        else:
            qq += term if (k // 2) % 2 == 0 else -term
        p *= zeta
    phase = zeta + math.pi / 4.0
    return (math.sin(phase) * pp - math.cos(phase) * qq) / (math.sqrt(math.pi) * x ** 0.25)


_U = _u_coeffs(_ASYM_TERMS)


@numba.njit(cache=True, nogil=True)
def _ai_scalar(z, u):
    if _SERIES_NEG <= z <= _SERIES_POS:
        return _ai_series(z)
    return _ai_asymptotic(z, u)


@numba.njit(cache=True, nogil=True)
def _ai_array(z, u):
    out = np.empty(z.size)
    for i in range(z.size):
        out[i] = _ai_scalar(z[i], u)
    return out


def airy_ai(z):
    """Airy function Ai for real scalar or array input."""
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Airy argument must be finite")
    if arr.ndim == 0:
        return float(_ai_scalar(float(arr), _U))
    return _ai_array(arr.ravel(), _U).reshape(arr.shape)
