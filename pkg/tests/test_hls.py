import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from intermittency import hls
from intermittency import kernels as kn
from intermittency import noise as nz
from intermittency.errors import InsufficientGrid, UnsupportedParameter

GRID = np.logspace(-3, -1, 12)


def riesz(lam, d=1, time=None):
    return nz.NoiseSpec(time or nz.WhiteInTime(), nz.Riesz(lam, d))


@given(st.floats(0.05, 0.95), st.floats(1e-3, 1.0))
def test_heat_closed_form(lam, t):
    # 2 int_0^inf exp(-t r^2) r^(lam-1) dr = Gamma(lam/2) t^(-lam/2)
    got = hls.spectral_mass_at(kn.Heat(1), riesz(lam), t)
    assert got == pytest.approx(math.gamma(lam / 2) * t ** (-lam / 2), rel=1e-8)


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.9])
def test_wave_closed_form(lam):
    t = 0.3
    mu = lam - 2
    want = 2 * t ** (2 - lam) * (-math.gamma(mu) * math.cos(mu * math.pi / 2) / 2 ** (mu + 1))
    assert hls.spectral_mass_at(kn.Wave(1), riesz(lam), t) == pytest.approx(want, rel=1e-9)


def test_heat_in_higher_dimension_and_product_noise():
    # radial: |S^{d-1}| int exp(-t r^2) r^(lam-1) dr = |S^{d-1}| Gamma(lam/2) t^(-lam/2) / 2
    t, lam = 0.2, 1.3
    area = 2 * math.pi
    got = hls.spectral_mass_at(kn.Heat(2), riesz(lam, 2), t)
    assert got == pytest.approx(area * math.gamma(lam / 2) * t ** (-lam / 2) / 2, rel=1e-8)
    # product noise: the integral factorizes over coordinates
    prod = nz.NoiseSpec(nz.WhiteInTime(), nz.ProductRL((0.4, 0.7)))
    want = math.prod(math.gamma(v / 2) * t ** (-v / 2) for v in (0.4, 0.7))
    assert hls.spectral_mass_at(kn.Heat(2), prod, t) == pytest.approx(want, rel=1e-8)


def test_white_space_is_lambda_one():
    t = 0.05
    got = hls.spectral_mass_at(kn.Heat(1), nz.white_white(), t)
    assert got == pytest.approx(math.sqrt(math.pi / t), rel=1e-9)


def test_fracdiff_beta_one_alpha_two_is_heat():
    n = riesz(0.5)
    a = hls.spectral_mass_at(kn.FracDiff(1, 2.0, 1.0), n, 0.01)
    b = hls.spectral_mass_at(kn.Heat(1), n, 0.01)
    assert a == pytest.approx(b, rel=1e-7)


@pytest.mark.parametrize("spec", [kn.Heat(1), kn.Wave(1)])
def test_direct_route_matches_spectral(spec):
    lam, t = 0.5, 0.1
    n = riesz(lam)
    spectral = hls.spectral_mass_at(spec, n, t)
    direct = hls.hls_mass_direct(spec, n, t)
    assert direct == pytest.approx(spectral * nz.riesz_fourier_constant(lam, 1) / (2 * math.pi), rel=1e-6)


def test_wave_sup_is_at_eta_zero():
    res = hls.hls_mass_spectral(kn.Wave(1), riesz(0.5), 0.01, detail=True)
    assert res.argmax_eta == 0.0
    assert len(res.etas) == hls.WAVE_ETA_POINTS
    assert all(v <= res.value * (1 + 1e-9) for v in res.values)
    assert res.values[1] < res.values[0]


def test_shifted_wave_at_zero_consistent():
    a = hls.spectral_mass_at(kn.Wave(1), riesz(0.4), 0.2, eta=1e-9)
    b = hls.spectral_mass_at(kn.Wave(1), riesz(0.4), 0.2)
    assert a == pytest.approx(b, rel=1e-6)
    with pytest.raises(UnsupportedParameter):
        hls.spectral_mass_at(kn.Heat(1), riesz(0.4), 0.2, eta=1.0)


@pytest.mark.parametrize("spec", [kn.Heat(1), kn.Wave(1), kn.AlphaHeat(1, 1.5), kn.FracDiff(1, 1.5, 0.8),
                                  kn.FracDiff(1, 1.5, 1.2)])
def test_fit_recovers_closed_form(spec):
    rep = hls.fit_hbar(spec, riesz(0.5), GRID)
    assert rep.abs_gap < 1e-6
    assert rep.closed_form_hbar > -1
    js = rep.to_json()
    assert js["schema_version"] == 1 and len(js["values"]) == 12


def test_scaling_spread_detects_wrong_exponent():
    n = riesz(0.5)
    assert hls.scaling_spread(kn.Heat(1), n, GRID) < 1e-10
    assert hls.scaling_spread(kn.Heat(1), n, GRID, hbar=0.0) > 0.5


def test_weighted_mass():
    lam, t = 0.5, 0.01
    tot, sup = hls.weighted_mass(kn.Wave(1), riesz(lam), t)
    assert tot == t
    # int_{-t}^{t} |y|^-lam / 2 dy at x = 0
    assert sup == pytest.approx(t ** (1 - lam) / (1 - lam), rel=1e-8)
    tot, sup = hls.weighted_mass(kn.Heat(1), nz.white_white(), t)
    assert sup == pytest.approx(1 / math.sqrt(2 * math.pi * t))


@pytest.mark.parametrize("grid", [np.logspace(-3, -1, 5), np.logspace(-2, -1, 12), np.logspace(-3, 0, 12),
                                  np.linspace(1e-3, 1e-1, 12), np.logspace(-1, -3, 12)])
def test_bad_grids(grid):
    with pytest.raises(InsufficientGrid):
        hls.fit_hbar(kn.Heat(1), riesz(0.5), grid)


def test_dimension_mismatch():
    with pytest.raises(UnsupportedParameter):
        hls.spectral_mass_at(kn.Heat(2), riesz(0.5), 0.1)
