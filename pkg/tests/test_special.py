import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from intermittency.errors import UnsupportedParameter
from intermittency.special import (MittagLefflerTable, mittag_leffler, ml_switch,
                                   neutral_fractional_density, wright)


@pytest.mark.parametrize("z", [-10.0, -3.3, -0.5, 0.0, 0.7, 1.0])
def test_ml_exponential(z):
    assert mittag_leffler(1.0, 1.0, z) == pytest.approx(math.exp(z), rel=1e-12)


@pytest.mark.parametrize("x", [0.1, 1.0, 2.5, 6.0])
def test_ml_trig_identities(x):
    assert mittag_leffler(2.0 - 1e-12, 1.0, -x * x) == pytest.approx(math.cos(x), abs=1e-9)
    assert mittag_leffler(1.0, 2.0, x) == pytest.approx(math.expm1(x) / x, rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 3.0, 9.0, 40.0, 200.0])
def test_ml_half_matches_erfcx(s):
    # E_{1/2,1}(-s) = erfcx(s), which covers the asymptotic branch for large s
    assert mittag_leffler(0.5, 1.0, -s) == pytest.approx(special.erfcx(s), rel=1e-9)


def test_ml_vectorized_and_table():
    s = np.linspace(0.0, 80.0, 57)
    for beta, beta2 in ((0.8, 0.8), (1.2, 1.2), (1.5, 1.0)):
        direct = mittag_leffler(beta, beta2, -s)
        table = MittagLefflerTable(beta, beta2)(s)
        assert np.allclose(table, direct, rtol=1e-8, atol=1e-14)


def test_ml_switch_is_finite_below_two():
    assert math.isfinite(ml_switch(0.8, 0.8))
    assert ml_switch(1.5, 1.5) >= 8.0


@given(st.floats(0.55, 1.9), st.floats(0.5, 2.0), st.floats(-30.0, 2.0))
def test_ml_recurrence(beta, beta2, z):
    # E_{b,b'}(z) = 1/Gamma(b') + z E_{b,b+b'}(z)
    lhs = mittag_leffler(beta, beta2, z)
    rhs = 1.0 / math.gamma(beta2) + z * mittag_leffler(beta, beta + beta2, z)
    assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-9)


def ml_oracle(beta, beta2, z):
    """Plain series with working precision above the largest term (alternating sums cancel)."""
    logs = [k * math.log(abs(z)) - math.lgamma(beta * k + beta2) if z else -math.inf for k in range(1, 6000)]
    peak = max([0.0] + logs) / math.log(10)
    n = next((k for k, v in enumerate(logs, 1) if k > 5 and v < math.log(1e-40) and v < logs[k - 2]), 6000)
    with mpmath.workdps(int(peak) + 40):
        b, b2, zz = mpmath.mpf(beta), mpmath.mpf(beta2), mpmath.mpf(z)
        return float(mpmath.fsum(zz ** k * mpmath.rgamma(b * k + b2) for k in range(n + 1)))


@given(st.floats(0.3, 1.9), st.floats(-5.0, 3.0))
def test_ml_against_mpmath_sum(beta, z):
    assert mittag_leffler(beta, beta, z) == pytest.approx(ml_oracle(beta, beta, z), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("z", [0.0, 0.4, 1.5, 3.0, 6.0])
def test_wright_m_function(z):
    # phi(-1/2, 1/2; -z) = exp(-z^2/4)/sqrt(pi)
    assert wright(-0.5, 0.5, -z) == pytest.approx(math.exp(-z * z / 4) / math.sqrt(math.pi), rel=1e-10)


def test_wright_zero_a_and_poles():
    assert wright(0.0, 2.5, 1.3) == pytest.approx(math.exp(1.3) / math.gamma(2.5), rel=1e-12)
    # Gamma poles in the series must not stop the summation early
    want = mpmath.nsum(lambda k: mpmath.mpf(-4) ** k * mpmath.rgamma(k + 1) * mpmath.rgamma(-0.35 * k + 0.35),
                       [0, mpmath.inf])
    assert wright(-0.35, 0.35, -4.0) == pytest.approx(float(want), rel=1e-9)
    with pytest.raises(UnsupportedParameter):
        wright(-1.0, 1.0, 0.5)


def test_neutral_density_cauchy_and_mass():
    x = np.linspace(-5, 5, 11)
    assert np.allclose(neutral_fractional_density(1.0, x), 1.0 / (math.pi * (1 + x * x)))
    for alpha in (0.6, 1.3, 1.8):
        f = lambda r: 2.0 * neutral_fractional_density(alpha, r)
        mass = integrate.quad(f, 0, 1)[0] + integrate.quad(f, 1, np.inf)[0]
        assert mass == pytest.approx(1.0, rel=1e-7)
