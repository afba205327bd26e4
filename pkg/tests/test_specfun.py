import math
import threading

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given
from hypothesis import strategies as st

from fluxcool import specfun
from fluxcool.errors import DomainError
from fluxcool.specfun import airy_ai, bessel_j_array, coverage_order


def j_series(n, x, terms=60):
    # power-series oracle in mpmath
    mpmath.mp.dps = 30
    h = mpmath.mpf(x) / 2
    return float(mpmath.nsum(lambda k: (-1) ** k * h ** (2 * k + n) / (mpmath.factorial(k) * mpmath.factorial(k + n)), [0, terms]))


def test_zero_argument():
    t = bessel_j_array(0.0, 5)
    assert t[0] == 1.0
    assert np.all(t.values[1:] == 0.0)


def test_j0_at_one_matches_series():
    assert bessel_j_array(1.0, 10)[0] == pytest.approx(0.7651976866, abs=1e-10)
    assert bessel_j_array(1.0, 10)[0] == pytest.approx(j_series(0, 1.0), abs=1e-14)
    assert bessel_j_array(1.0, 10)[3] == pytest.approx(j_series(3, 1.0), abs=1e-14)


@pytest.mark.parametrize("x", [0.1, 1.0, 50.0, 4250.0])
def test_sum_rule(x):
    t = bessel_j_array(x, 1)
    assert t.n_max >= coverage_order(x)
    assert abs(t.sum_rule() - 1.0) < 1e-10


@pytest.mark.parametrize("x", [0.0005, 0.7, 12.3, 333.0, 4250.0, 21000.0])
def test_against_scipy(x):
    t = bessel_j_array(x, 1)
    n = np.arange(t.n_max + 1)
    assert np.max(np.abs(t.values - sc.jv(n, x))) < 1e-10


def test_high_order_against_mpmath():
    x = 4250.0
    t = bessel_j_array(x, 1)
    mpmath.mp.dps = 30
    for n in (0, 17, 4200, 4250, 4300):
        assert t[n] == pytest.approx(float(mpmath.besselj(n, x)), abs=1e-12)


@given(st.floats(0.5, 2000.0), st.integers(1, 3000))
def test_recurrence_consistency(x, n):
    t = bessel_j_array(x, 1)
    if n + 1 > t.n_max:
        return
    jn = t[n]
    if abs(jn) < 1e-6:
        return
    lhs = t[n - 1] + t[n + 1]
    assert lhs == pytest.approx(2 * n / x * jn, rel=1e-8, abs=1e-14)


def test_padding_and_errors():
    t = bessel_j_array(2.0, 500)
    assert t.n_max == 500 and t.values.size == 501 and t[499] == 0.0
    for bad in (-1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            bessel_j_array(bad, 5)
    with pytest.raises(DomainError):
        bessel_j_array(1.0, 0)


def test_cache_is_invisible():
    specfun.clear_cache()
    a = bessel_j_array(123.456, 10).values.copy()
    b = bessel_j_array(123.456, 10).values
    c = bessel_j_array(123.456, 10, use_cache=False).values
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert specfun.cache_info()["hits"] >= 1
    with pytest.raises(ValueError):
        specfun.canonical_table(123.456)[0] = 2.0


def test_cache_bounded():
    specfun.set_cache_size(4)
    try:
        for x in range(10):
            specfun.canonical_table(float(x) + 0.5)
        assert specfun.cache_info()["size"] == 4
    finally:
        specfun.set_cache_size(64)
    with pytest.raises(DomainError):
        specfun.set_cache_size(0)


def test_cache_concurrent_calls_match_uncached():
    specfun.clear_cache()
    xs = [10.0 + 7.3 * k for k in range(30)]
    ref = {x: bessel_j_array(x, 1, use_cache=False).values for x in xs}
    bad = []

    def work():
        for x in xs:
            if not np.array_equal(bessel_j_array(x, 1).values, ref[x]):
                bad.append(x)

    threads = [threading.Thread(target=work) for _ in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert not bad


def test_airy_at_zero():
    assert airy_ai(0.0) == pytest.approx(0.3550280539, abs=1e-10)
    mpmath.mp.dps = 30
    assert airy_ai(0.0) == pytest.approx(float(3 ** mpmath.mpf(-2 / 3) / mpmath.gamma(mpmath.mpf(2) / 3)), abs=1e-14)


def test_airy_against_scipy():
    z = np.linspace(-20.0, 10.0, 3001)
    assert np.max(np.abs(airy_ai(z) - sc.airy(z)[0])) < 1e-9


def test_airy_wide_range_and_decay():
    z = np.linspace(-60.0, 60.0, 4001)
    assert np.max(np.abs(airy_ai(z) - sc.airy(z)[0])) < 1e-10
    vals = [airy_ai(z) for z in (2.0, 4.0, 6.0, 8.0)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))
    assert airy_ai(200.0) == 0.0
    with pytest.raises(DomainError):
        airy_ai(math.nan)


def test_uniform_approximation_near_turning_point():
    x = 500.0
    t = bessel_j_array(x, 1)
    c = (2.0 / x) ** (1.0 / 3.0)
    n = np.arange(480, 521)
    exact = t.values[n]
    approx = c * airy_ai(c * (n - x))
    # relative error is measured against the window's peak; pointwise
    # relative error is meaningless at the oscillation zeros below n = x
    peak = np.max(np.abs(exact))
    assert np.max(np.abs(approx - exact)) <= 0.05 * peak
    big = np.abs(exact) >= 0.5 * peak
    assert np.all(np.abs(approx[big] - exact[big]) <= 0.05 * np.abs(exact[big]))
