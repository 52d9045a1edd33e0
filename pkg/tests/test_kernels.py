import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from intermittency import kernels as kn
from intermittency.errors import (MeasureKernelNoDensity, NonpositiveTime, ParameterOutOfPositivityRange,
                                  RadiusOutOfRange, UnsupportedParameter)
from intermittency.special import wright


def wright_fracdiff(beta, t, x):
    """alpha = 2, d = 1 fractional kernel through the Wright function (nu = 1/2)."""
    nu = 0.5
    z = -abs(x) / (math.sqrt(nu) * t ** (beta / 2))
    return t ** (beta / 2 - 1) * wright(-beta / 2, beta / 2, z) / (2 * math.sqrt(nu))


@pytest.mark.parametrize("beta", [0.6, 0.8, 0.95])
def test_fracdiff_alpha2_matches_wright(beta):
    spec = kn.FracDiff(1, 2.0, beta)
    for t in (0.3, 1.0, 2.5):
        for x in (0.0, 0.2, 0.9, 2.0):
            want = wright_fracdiff(beta, t, x)
            assert kn.fracdiff_density(spec, t, x) == pytest.approx(want, rel=1e-6, abs=1e-12)


def test_fracdiff_beta1_alpha2_is_heat():
    x = np.linspace(0, 3, 13)
    got = kn.kernel_density(kn.FracDiff(1, 2.0, 1.0), 0.7, x)
    assert np.allclose(got, kn.heat_density(0.7, x), rtol=1e-7, atol=1e-13)


def test_alpha_heat_cauchy():
    # (1/2)(-Delta)^(1/2) generates a Cauchy law with scale t/2
    t = 0.8
    x = np.array([0.0, 0.1, 0.5, 2.0, 10.0])
    want = (t / 2) / (math.pi * ((t / 2) ** 2 + x * x))
    assert np.allclose(kn.kernel_density(kn.AlphaHeat(1, 1.0), t, x), want, rtol=1e-6)


@pytest.mark.parametrize("spec", [kn.AlphaHeat(1, 1.5), kn.FracDiff(1, 1.5, 1.2), kn.FracDiff(2, 2.0, 1.4),
                                  kn.AlphaHeat(3, 0.8)])
def test_table_matches_direct_quadrature(spec):
    r = np.array([0.0, 0.3, 1.1, 2.7])
    x = np.zeros((4, spec.d))
    x[:, 0] = r
    pts = r if spec.d == 1 else x
    fast = kn._profile_density(spec, 1.3, pts, direct=False)
    slow = kn._profile_density(spec, 1.3, pts, direct=True)
    assert np.allclose(fast, slow, rtol=1e-6, atol=1e-12)


def test_fourier_matches_density_d1():
    for spec in (kn.Heat(1), kn.AlphaHeat(1, 1.5), kn.FracDiff(1, 1.5, 0.8)):
        t, xi = 0.9, 1.7
        f = lambda x: 2 * float(kn.kernel_density(spec, t, x))
        val = integrate.quad(f, 0, np.inf, weight="cos", wvar=xi, limlst=100)[0]
        assert val == pytest.approx(kn.kernel_fourier(spec, t, xi), abs=2e-6)


@given(st.floats(0.05, 4.0), st.floats(0.0, 3.0), st.sampled_from([kn.Heat(1), kn.AlphaHeat(1, 1.5),
                                                                   kn.FracDiff(1, 1.5, 1.2)]))
def test_time_scaling(t, r, spec):
    A, B = kn.time_scaling(spec)
    g = float(kn.radial_density(spec, 1.0, r / t ** B))
    assert float(kn.radial_density(spec, t, r)) == pytest.approx(t ** A * g, rel=1e-6, abs=1e-300)


@given(st.integers(1, 3), st.floats(0.01, 2.0), st.floats(0.0, 1.5), st.floats(0.01, 1.0))
def test_heat_ball_mass_vs_noncentral_chi2(d, t, rho, eps):
    q = kn.BallMassQuery(t, (0.0,) * d, (rho,) + (0.0,) * (d - 1), eps)
    want = kn.ball_mass_closed_heat(d, t, rho, eps)
    assert kn.ball_mass(kn.Heat(d), q) == pytest.approx(want, rel=1e-7, abs=1e-13)


@given(st.floats(0.01, 3.0), st.floats(0.0, 2.0), st.floats(0.01, 1.0))
def test_wave1_ball_mass_interval_length(t, rho, eps):
    q = kn.BallMassQuery(t, 0.0, rho, eps)
    want = 0.5 * max(0.0, min(t, rho + eps) - max(-t, rho - eps))
    assert kn.ball_mass(kn.Wave(1), q) == pytest.approx(want, abs=1e-14)


def test_wave2_total_and_ball_mass_by_polar_quadrature():
    t = 0.6
    assert kn.total_mass_quadrature(kn.Wave(2), t) == pytest.approx(t, rel=1e-12)
    # ball off the origin: integrate the density in polar coordinates around the ball center
    rho, eps = 0.4, 0.35
    q = kn.BallMassQuery(t, (0.0, 0.0), (rho, 0.0), eps)

    def inner(s):
        # radius s around the kernel center; angular fraction inside the ball
        return float(kn.shell_fraction(2, s, rho, eps)) * 2 * math.pi * s / (2 * math.pi * math.sqrt(t * t - s * s))

    want = integrate.quad(inner, rho - eps, t, points=[eps - rho], limit=200)[0]
    assert kn.ball_mass(kn.Wave(2), q) == pytest.approx(want, rel=1e-7)


@given(st.floats(0.05, 1.0), st.floats(0.0, 1.0), st.floats(0.05, 1.0))
def test_shell_fraction_d3_is_cap_area(r, rho, eps):
    # spherical cap fraction (1 - cos theta)/2 in three dimensions
    frac = float(kn.shell_fraction(3, r, rho, eps))
    if r <= eps - rho:
        assert frac == 1.0
    elif r >= rho + eps or r <= rho - eps:
        assert frac == 0.0
    else:
        c = (r * r + rho * rho - eps * eps) / (2 * r * rho)
        assert frac == pytest.approx((1 - c) / 2, abs=1e-8)


def test_ball_mass_nonnegative_and_monotone_in_eps():
    spec = kn.FracDiff(1, 1.5, 1.2)
    prev = 0.0
    for eps in (0.1, 0.3, 0.6, 1.0):
        m = kn.ball_mass(spec, kn.BallMassQuery(0.5, 0.0, 0.2, eps))
        assert m >= prev
        prev = m


def test_errors():
    with pytest.raises(ParameterOutOfPositivityRange):
        kn.FracDiff(2, 1.5, 1.2)
    with pytest.raises(UnsupportedParameter):
        kn.Wave(4)
    with pytest.raises(RadiusOutOfRange):
        kn.BallMassQuery(1.0, 0.0, 0.0, 1.5)
    with pytest.raises(NonpositiveTime):
        kn.BallMassQuery(0.0, 0.0, 0.0, 0.5)
    with pytest.raises(MeasureKernelNoDensity):
        kn.kernel_density(kn.Wave(3), 1.0, np.zeros(3))
    assert math.isinf(kn.wave_density(1.0, np.array([1.0, 0.0]), 2))


@pytest.mark.parametrize("spec", [kn.Heat(2), kn.AlphaHeat(1, 0.7), kn.Wave(3), kn.FracDiff(1, 1.5, 1.2)])
def test_json_round_trip(spec):
    assert kn.kernel_from_json(kn.kernel_to_json(spec)) == spec
