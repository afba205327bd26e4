import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxcool.errors import ComputeError, DomainError, NotReachedError, SingularInputError, ValidityError
from fluxcool.model import DriveConfig, TransitionChannel, Waveform, ang, build_channels, channel, reference_model
from fluxcool.rates import (
    Activation,
    GeneratorMatrix,
    airy_rate,
    airy_three_term,
    airy_three_term_parts,
    assemble_generator,
    interwell_up_rate,
    lz_probability,
    mdlz_rate,
    photon_sum_rate,
    static_rate,
    truncation_order,
)
from oracles import generator_oracle

SYM = Waveform.SYMMETRIC
ONE = Waveform.ONE_SIDED

channel_params = st.tuples(
    st.floats(0.0, 3.0),  # gap
    st.floats(-200.0, 200.0),  # eps
    st.floats(0.01, 10.0),  # width
    st.floats(0.001, 10.0),  # omega
)


def make(gap, eps, amp, width):
    return TransitionChannel(1, 2, gap, eps, amp, width, 1.0)


# --- Landau-Zener -----------------------------------------------------------


def test_lz_zero_gap(weak):
    m = weak.replace(gap12=0.0)
    d = DriveConfig(SYM, 8.4, ang(0.005), 0.05)
    assert lz_probability(m, d, channel(m, d, 1, 2)).probability == 0.0


def test_lz_not_reached(weak):
    d = DriveConfig(SYM, 0.1, ang(0.005), 0.05)
    with pytest.raises(NotReachedError):
        lz_probability(weak, d, channel(weak, d, 1, 2))


def test_lz_closed_form_and_finite_difference(weak):
    d = DriveConfig(SYM, 8.4, ang(0.005), 0.05)
    ch = channel(weak, d, 1, 2)
    res = lz_probability(weak, d, ch)
    s = (8.4 - 0.05) / 8.4
    assert math.sin(res.phase) == pytest.approx(s, rel=1e-14)
    # sweep rate from finite differences of eps1 - eps2 along the drive
    t0, h = res.time, 1e-4
    def gap_energy(t):
        e = weak.level_energies(d.flux(t))
        return e[1] - e[2]
    zeta_fd = abs(gap_energy(t0 + h) - gap_energy(t0 - h)) / (2 * h)
    assert res.sweep_rate == pytest.approx(zeta_fd, rel=1e-6)
    assert res.probability == pytest.approx(1.0 - math.exp(-ch.gap**2 / (4 * res.sweep_rate)), rel=1e-12)
    assert 0.0 < res.probability < 1.0


def test_lz_turning_point_and_one_sided(weak):
    d = DriveConfig(SYM, 8.35, ang(0.005), 0.05)
    res = lz_probability(weak, d, channel(weak, d, 1, 2))
    assert res.adiabatic_limit and res.probability == 1.0
    one = DriveConfig(ONE, 4.3, ang(0.005), 0.05)
    r1 = lz_probability(weak, one, channel(weak, one, 1, 2))
    assert math.sin(r1.phase) == pytest.approx((8.4 - 0.05) / 4.3 - 1.0, rel=1e-12)
    parked = DriveConfig(SYM, 0.0, ang(0.005), 8.4)
    assert lz_probability(weak, parked, channel(weak, parked, 1, 2)).adiabatic_limit


# --- static and driven rates ------------------------------------------------


def test_static_rate_examples():
    assert static_rate(make(2.0, 0.0, 0.0, 0.5)) == pytest.approx(4.0 / (2 * 0.5))
    vals = [static_rate(make(1.0, e, 0.0, 0.3)) for e in (0, 1, 10, 100, 1e6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(SingularInputError):
        static_rate(make(1.0, 0.0, 0.0, 0.0))


def test_static_rate_on_side_crossover(weak):
    d = DriveConfig(SYM, 0.0, ang(0.005), 8.4)
    ch = channel(weak, d, 1, 2)
    assert ch.eps == 0.0
    assert static_rate(ch) == pytest.approx(ang(0.09**2 / (2 * 0.11)), rel=1e-12)
    assert static_rate(ch) == pytest.approx(ang(0.0368), rel=1e-3)


@given(channel_params)
def test_zero_drive_reduces_to_static_rate(p):
    gap, eps, width, omega = p
    ch = make(gap, eps, 0.0, width)
    assert mdlz_rate(ch, SYM, omega) == static_rate(ch)


@given(channel_params, st.floats(0.0, 300.0))
def test_one_sided_is_shifted_symmetric(p, amp):
    gap, eps, width, omega = p
    one = mdlz_rate(make(gap, eps, amp, width), ONE, omega)
    sym = mdlz_rate(make(gap, eps + amp, amp, width), SYM, omega)
    assert one == sym


@given(channel_params, st.floats(0.0, 300.0))
def test_symmetric_rate_even_in_eps(p, amp):
    gap, eps, width, omega = p
    a = mdlz_rate(make(gap, eps, amp, width), SYM, omega)
    b = mdlz_rate(make(gap, -eps, amp, width), SYM, omega)
    assert a == pytest.approx(b, rel=1e-12, abs=0.0)


@given(channel_params, st.floats(0.0, 300.0))
def test_rate_bounded_by_lorentzian_peak(p, amp):
    gap, eps, width, omega = p
    w = mdlz_rate(make(gap, eps, amp, width), SYM, omega)
    assert 0.0 <= w <= gap**2 / (2 * width) * (1 + 1e-6)


def test_label_swap_symmetry(weak):
    d = DriveConfig(SYM, 8.35, ang(0.005), 0.05)
    g = assemble_generator(weak, d)
    r = g.rates
    assert (r.w01, r.w12, r.w03, r.w23) == (r.w10, r.w21, r.w30, r.w32)
    ch = channel(weak, d, 1, 2)
    swapped = TransitionChannel(2, 1, ch.gap, ch.eps, ch.amp, ch.width, ch.slope)
    assert mdlz_rate(swapped, SYM, d.omega) == mdlz_rate(ch, SYM, d.omega)


OPERATING_POINTS = [
    (0.06, SYM, 8.35),
    (1.0, SYM, 8.1),
    (1.0, ONE, 4.3),
]


@pytest.mark.parametrize("gamma2, waveform, phi", OPERATING_POINTS)
def test_truncation_doubling(gamma2, waveform, phi):
    m = reference_model(gamma2)
    d = DriveConfig(waveform, phi, ang(0.005), 0.05)
    for ch in build_channels(m, d):
        e = ch.eps + (ch.amp if waveform is ONE else 0.0)
        n = truncation_order(e, ch.amp, ch.width, d.omega)
        a = mdlz_rate(ch, waveform, d.omega)
        b = mdlz_rate(ch, waveform, d.omega, 2 * n)
        assert abs(a - b) <= 1e-9 * a


def test_photon_sum_errors():
    with pytest.raises(DomainError):
        photon_sum_rate(1.0, 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(SingularInputError):
        photon_sum_rate(1.0, 0.0, 1.0, 0.0, 1.0)
    assert photon_sum_rate(0.0, 0.0, 1.0, 1.0, 1.0) == 0.0


# --- Airy forms --------------------------------------------------------------


def test_airy_rate_matches_exact_one_sided(weak):
    # operating point of the one-sided drive, A/omega ~ 2000
    d = DriveConfig(ONE, 4.3, ang(0.005), 0.05)
    ch = channel(weak, d, 1, 2)
    assert ch.amp / d.omega > 1000
    exact = mdlz_rate(ch, ONE, d.omega)
    assert airy_rate(ch, d.omega) == pytest.approx(exact, rel=0.10)


def test_airy_validity_guard():
    ch = make(1.0, 0.0, 5.0, 0.1)
    with pytest.raises(ValidityError):
        airy_rate(ch, 1.0)
    with pytest.raises(ValidityError):
        airy_three_term(ch, 1.0)


def test_airy_terms_beyond_turning_point_negligible(weak):
    from fluxcool import specfun

    d = DriveConfig(ONE, 4.3, ang(0.005), 0.05)
    ch = channel(weak, d, 1, 2)
    x = ch.amp / d.omega
    c = (2.0 / x) ** (1.0 / 3.0)
    n = x + 50 * (x / 2.0) ** (1.0 / 3.0)
    ai = specfun.airy_ai(c * (n - x))
    e = ch.eps + ch.amp
    term = c * c * ai * ai / ((e - n * d.omega) ** 2 / ch.width + ch.width) * ch.gap**2 / 2
    assert term < 1e-12 * airy_rate(ch, d.omega)


def test_three_term_finite_and_nonnegative(weak):
    omegas = ang(np.geomspace(0.001, 2.0, 60))
    for phi in (8.35, 8.4):
        d = DriveConfig(SYM, phi, ang(0.005), 0.05)
        ch = channel(weak, d, 1, 2)
        vals = [airy_three_term(ch, w, SYM) for w in omegas]
        assert np.all(np.isfinite(vals)) and min(vals) >= 0.0


def test_three_term_sidebands_single_interior_maximum():
    m = reference_model(gamma2_ghz=1.0)
    d = DriveConfig(SYM, 8.35, ang(0.005), 0.05)
    ch = channel(m, d, 1, 2)
    assert ch.width == pytest.approx(ang(1.05))
    omegas = ang(np.geomspace(0.001, 2.0, 200))
    sides = np.array([airy_three_term_parts(ch, w, SYM)[1] for w in omegas])
    k = int(np.argmax(sides))
    assert 0 < k < omegas.size - 1
    assert np.all(np.diff(sides[: k + 1]) > 0) and np.all(np.diff(sides[k:]) < 0)
    # beyond the decoherence width the sideband contribution falls
    tail = omegas > 2 * ch.width
    assert np.all(np.diff(sides[tail]) < 0)


# --- up rate and generator ---------------------------------------------------


def test_up_rate_ordinary(weak):
    d0 = DriveConfig(SYM, 8.35, ang(0.005), 0.0)
    assert interwell_up_rate(weak, d0) == weak.gamma10_inter
    d = DriveConfig(SYM, 8.35, ang(0.005), 0.05)
    assert weak.temperature == pytest.approx(ang(1.0418), rel=1e-4)
    ratio = interwell_up_rate(weak, d) / weak.gamma10_inter
    assert ratio == pytest.approx(math.exp(-0.144 / 1.04183), rel=1e-9)
    assert ratio == pytest.approx(0.8710, abs=1e-4)


def test_up_rate_new_method_decreases_with_amplitude(weak):
    vals = [interwell_up_rate(weak, DriveConfig(ONE, a, ang(0.005), 0.05)) for a in np.linspace(0, 6, 13)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_up_rate_literal_mode(weak):
    d = DriveConfig(ONE, 4.3, ang(0.005), 0.05)
    chs = {c.label: c for c in build_channels(weak, d)}
    lit = interwell_up_rate(weak, d, Activation.LITERAL)
    expected = weak.gamma10_inter * math.exp(-(chs["12"].eps - chs["12"].amp) / weak.temperature)
    assert lit == pytest.approx(expected, rel=1e-12)
    assert lit > weak.gamma10_inter
    cold = weak.replace(temperature=1e-3)
    with pytest.raises(ComputeError):
        interwell_up_rate(cold, d, Activation.LITERAL)


def test_gap_free_generator(weak):
    m = weak.replace(gap01=0.0, gap12=0.0, gap03=0.0, gap23=0.0)
    g = assemble_generator(m, DriveConfig(SYM, 0.0, ang(0.005), 0.05)).g
    assert g[0, 1] == m.gamma10_inter and g[1, 0] > 0
    assert g[0, 2] == m.gamma20 and g[1, 3] == m.gamma31
    assert g[2, 0] == g[3, 0] == g[2, 1] == g[3, 1] == g[3, 2] == g[2, 3] == 0.0


@given(
    st.floats(-10.0, 10.0),
    st.floats(0.0, 10.0),
    st.floats(0.001, 2.0),
    st.floats(0.01, 1.5),
    st.sampled_from([SYM, ONE]),
)
def test_generator_invariants(d, phi, f, g2, waveform):
    m = reference_model(gamma2_ghz=g2)
    gen = assemble_generator(m, DriveConfig(waveform, phi, ang(f), d))
    gen.check(atol=1e-14)
    assert np.max(np.abs(gen.g.sum(axis=0))) <= 1e-14 * max(1.0, np.max(np.abs(gen.g)))
    assert np.array_equal(gen.g, generator_oracle(gen.rates))
    rates = [v for v in gen.rates.as_dict().values() if isinstance(v, float)]
    assert all(r >= 0.0 and math.isfinite(r) for r in rates)


def test_generator_bounded_over_fig3_grid(weak):
    for d in np.linspace(-1, 1, 9):
        for f in np.geomspace(0.001, 2.0, 9):
            gen = assemble_generator(weak, DriveConfig(SYM, 8.4, ang(f), d))
            rates = [v for v in gen.rates.as_dict().values() if isinstance(v, float)]
            assert np.all(np.isfinite(gen.g))
            assert np.max(np.abs(gen.g)) <= 4 * max(rates)


def test_generator_matrix_validation():
    with pytest.raises(DomainError):
        GeneratorMatrix(np.zeros((3, 3)))
    with pytest.raises(ComputeError):
        GeneratorMatrix(np.full((4, 4), np.nan))
    bad = GeneratorMatrix(np.array([[1.0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))
    with pytest.raises(DomainError):
        bad.check()
