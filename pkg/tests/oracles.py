"""Slow independent reference implementations used only by the tests."""

import mpmath
import numpy as np
import scipy.special as sc


def brute_force_rate(gap, e, amp, width, omega, n_max, dps=30):
    """Photon-assisted rate summed directly over |n| <= n_max.

    Bessel values come from scipy (AMOS), independent of the package kernel;
    every Lorentzian and the accumulation are done in mpmath.
    """
    mpmath.mp.dps = dps
    x = amp / omega
    n = np.arange(0, n_max + 1)
    j2 = sc.jv(n, x) ** 2 if x > 0 else (n == 0).astype(float)
    e = mpmath.mpf(e)
    w = mpmath.mpf(width)
    om = mpmath.mpf(omega)
    terms = [mpmath.mpf(j2[0]) * w / (e * e + w * w)]
    for k in range(1, n_max + 1):
        if j2[k] == 0.0:
            continue
        jk = mpmath.mpf(j2[k])
        a = e - k * om
        b = e + k * om
        terms.append(jk * w / (a * a + w * w))
        terms.append(jk * w / (b * b + w * w))
    return float(mpmath.mpf(gap) ** 2 / 2 * mpmath.fsum(terms))


def generator_oracle(rates):
    """Generator built entry by entry from the flow terms, independent of the package."""
    r = rates
    g = np.zeros((4, 4))
    flows = [
        # (from, to, rate)
        (1, 0, r.gamma10_inter + r.w01),
        (0, 1, r.gamma01_inter + r.w01),
        (2, 0, r.gamma20),
        (3, 1, r.gamma31),
        (1, 2, r.w12),
        (2, 1, r.w12),
        (0, 3, r.w03),
        (3, 0, r.w03),
        (2, 3, r.w23),
        (3, 2, r.w23),
    ]
    for src, dst, k in flows:
        g[dst, src] += k
        g[src, src] -= k
    return g
