import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from intermittency import noise as nz
from intermittency.errors import EvalOfDelta, SingularPoint, UnsupportedParameter


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
def test_riesz_constant_d1_by_oscillatory_quadrature(lam):
    xi = 1.3
    # int e^{-i xi x} |x|^-lam dx = 2 int_0^inf cos(xi x) x^-lam dx
    head = integrate.quad(lambda x: 2 * math.cos(xi * x), 0, 1, weight="alg", wvar=(-lam, 0))[0]
    tail = integrate.quad(lambda x: 2 * x ** -lam, 1, np.inf, weight="cos", wvar=xi)[0]
    want = (head + tail) / xi ** (lam - 1)
    assert nz.riesz_fourier_constant(lam, 1) == pytest.approx(want, rel=1e-7)
    closed = 2 * math.gamma(1 - lam) * math.sin(math.pi * lam / 2)
    assert nz.riesz_fourier_constant(lam, 1) == pytest.approx(closed, rel=1e-12)


def test_product_constant_and_spectral_density():
    sc = nz.ProductRL((0.3, 0.6))
    assert nz.fourier_constant(sc) == pytest.approx(nz.riesz_fourier_constant(0.3, 1)
                                                    * nz.riesz_fourier_constant(0.6, 1))
    assert nz.spectral_density(sc, [2.0, 0.5]) == pytest.approx(2.0 ** -0.7 * 0.5 ** -0.4)
    assert nz.total_lambda(sc) == pytest.approx(0.9)


@given(st.floats(0.05, 2.95), st.floats(0.01, 10.0))
def test_riesz_values(lam, r):
    sc = nz.Riesz(lam, 3)
    assert nz.eval_lambda(sc, [r, 0.0, 0.0]) == pytest.approx(r ** -lam)
    assert nz.spectral_density(sc, [0.0, r, 0.0]) == pytest.approx(r ** (lam - 3))


def test_white_and_singular_points():
    with pytest.raises(EvalOfDelta):
        nz.eval_gamma(nz.WhiteInTime(), 0.3)
    with pytest.raises(EvalOfDelta):
        nz.eval_lambda(nz.DeltaD1(), 0.3)
    with pytest.raises(SingularPoint):
        nz.eval_gamma(nz.PowerLaw(0.5), 0.0)
    with pytest.raises(SingularPoint):
        nz.eval_lambda(nz.Riesz(0.5, 2), [0.0, 0.0])
    assert nz.eval_gamma(nz.PowerLaw(0.5), -4.0) == pytest.approx(0.5)


def test_parameter_checks():
    for bad in (lambda: nz.PowerLaw(1.0), lambda: nz.Riesz(1.0, 1), lambda: nz.ProductRL(()),
                lambda: nz.ProductRL((0.5, 1.2)), lambda: nz.Riesz(0.5, 0),
                lambda: nz.NoiseSpec(nz.PowerLaw(0.5), nz.DeltaD1())):
        with pytest.raises(UnsupportedParameter):
            bad()


def test_hurst_and_properties():
    n = nz.NoiseSpec(nz.PowerLaw(0.5), nz.Riesz(0.4, 2))
    assert (n.d, n.lam, n.gamma, n.hurst) == (2, 0.4, 0.5, 0.75)
    assert nz.white_white().gamma == 1.0


@pytest.mark.parametrize("spec", [
    nz.white_white(), nz.NoiseSpec(nz.PowerLaw(0.3, 0.5, 2.0), nz.Riesz(0.4, 2)),
    nz.NoiseSpec(nz.WhiteInTime(), nz.ProductRL((0.2, 0.7))),
    nz.NoiseSpec(nz.WhiteInTime(), nz.RieszHat(0.5, 1)),
    nz.NoiseSpec(nz.PowerLaw(0.5), nz.ProductHat((0.5,))),
])
def test_json_round_trip(spec):
    assert nz.noise_from_json(nz.noise_to_json(spec)) == spec
