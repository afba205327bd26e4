"""Stationary and transient solutions of the four-state rate equations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from .errors import ComputeError, DegenerateChainError, DomainError
from .rates import GeneratorMatrix

PIVOT_TOL = 1e-13
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class SteadyState:
    """Occupations (p00, p11, p22, p33), residual ||G p||_inf and effective
    temperature (rad*GHz, ``None`` when undefined)."""

    p: np.ndarray
    residual: float
    t_eff: float | None = None

    @property
    def p11(self) -> float:
        return float(self.p[1])

    @property
    def p00(self) -> float:
        return float(self.p[0])


def _closed_classes(g):
    adj = (g.T > 0).astype(int)
    np.fill_diagonal(adj, 0)
    n, labels = connected_components(adj, directed=True, connection="strong")
    classes = [tuple(int(i) for i in np.flatnonzero(labels == c)) for c in range(n)]
    closed = []
    for cls in classes:
        inside = set(cls)
        leaks = any(adj[i, j] for i in cls for j in range(4) if j not in inside)
        if not leaks:
            closed.append(cls)
    return closed


def steady_state(generator: GeneratorMatrix) -> SteadyState:
    """Solve G p = 0 with sum(p) = 1.

    The normalization replaces the equation with the largest diagonal
    magnitude; the 4x4 system is LU-factored with partial pivoting.
    """
    g = np.asarray(generator.g, dtype=float)
    scale = float(np.max(np.abs(g)))
    if scale == 0.0:
        raise DegenerateChainError("all rates vanish; every state is its own closed class", [(k,) for k in range(4)])
    row = int(np.argmax(np.abs(np.diag(g))))
    a = g.copy()
    a[row, :] = 1.0
    b = np.zeros(4)
    b[row] = 1.0
    with warnings.catch_warnings():
        # exact singularity is reported below with the offending classes
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    if np.min(np.abs(np.diag(lu))) <= PIVOT_TOL * max(1.0, scale):
        closed = _closed_classes(g)
        names = ", ".join("{" + ",".join(str(k) for k in c) + "}" for c in closed)
        raise DegenerateChainError(f"reducible chain; disconnected closed classes: {names}", closed)
    p = scipy.linalg.lu_solve((lu, piv), b)
    if np.any(p < -CLAMP_TOL):
        raise ComputeError(f"steady state has negative occupation {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    residual = float(np.max(np.abs(g @ p)))
    t_eff = None
    if generator.eps10 is not None and p[0] > 0.0 and p[1] > 0.0:
        t_eff = effective_temperature(float(p[1]), float(p[0]), generator.eps10)
    p.setflags(write=False)
    return SteadyState(p=p, residual=residual, t_eff=t_eff)


def rk4_step_matrix(g: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear system dp/dt = g p, as a matrix."""
    h = dt * np.asarray(g, dtype=float)
    eye = np.eye(h.shape[0])
    h2 = h @ h
    return eye + h + h2 / 2.0 + h2 @ h / 6.0 + h2 @ h2 / 24.0


def time_evolve(generator: GeneratorMatrix, p0, t_final: float, dt: float) -> np.ndarray:
    """Fixed-step RK4 integration of dp/dt = G p from ``p0`` to ``t_final``."""
    g = np.asarray(generator.g, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (4,) or np.any(p0 < 0.0) or abs(p0.sum() - 1.0) > 1e-12:
        raise DomainError("p0 must be a probability 4-vector")
    if dt <= 0.0 or t_final < 0.0:
        raise DomainError("dt must be positive and t_final nonnegative")
    stiff = dt * float(np.max(np.abs(np.diag(g))))
    if stiff >= 0.1:
        raise DomainError(f"step too large: dt*max|G_kk| = {stiff:.3g} >= 0.1")
    steps = int(math.ceil(t_final / dt - 1e-9))
    if steps == 0:
        return p0.copy()
    step = rk4_step_matrix(g, t_final / steps)
    return np.linalg.matrix_power(step, steps) @ p0


def effective_temperature(p11: float, p00: float, eps10: float) -> float | None:
    """Temperature (rad*GHz) reproducing p11/p00 through the Boltzmann factor.

    Returns ``None`` when it is undefined (equal populations or degenerate levels).
    """
    if not (0.0 < p00 < 1.0 and 0.0 < p11 < 1.0):
        raise DomainError(f"populations must lie in (0, 1), got p00={p00!r}, p11={p11!r}")
    if p00 == p11 or eps10 == 0.0:
        return None
    return eps10 / math.log(p00 / p11)


def _reduced(numerator, denominator):
    if denominator <= 0.0:
        raise DomainError("rates give a vanishing denominator")
    return numerator / denominator


def p11_two_channel(w12: float, w03: float, g10: float, g01: float) -> float:
    """p11 when only the 1->2 pump and the 0->3 leak compete with thermal exchange.

    Valid while the driven rates are small against intrawell relaxation.
    """
    if min(w12, w03, g10, g01) < 0.0:
        raise DomainError("rates must be nonnegative")
    return _reduced(g01 + w03, g10 + g01 + w12 + w03)


def p11_one_channel(w12: float, g10: float, g01: float) -> float:
    """p11 with the 1->2 pump as the only driven channel (one-sided drive)."""
    if min(w12, g10, g01) < 0.0:
        raise DomainError("rates must be nonnegative")
    return _reduced(g01, g10 + g01 + w12)


def equilibrium_p11(eps10: float, temperature: float) -> float:
    """Thermal occupation of |1> in the two-level {0, 1} subspace."""
    return 1.0 / (1.0 + math.exp(eps10 / temperature))
