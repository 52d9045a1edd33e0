import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from intermittency import exponents as ex
from intermittency import hls
from intermittency import kernels as kn
from intermittency import moments as mo
from intermittency import noise as nz
from intermittency.errors import ConstraintViolated, DimensionCap, UnstableDiscretization, UnsupportedParameter

HEAT = kn.Heat(1)
WW = nz.white_white()
ABS_Z_NEG = lambda lam: 2 ** (-lam / 2) * math.gamma((1 - lam) / 2) / math.sqrt(math.pi)  # E|Z|^-lam


def within(est, want, k=4.0):
    return abs(est.value - want) <= k * est.std_error + 1e-12


# chaos kernels

def test_f1_heat_value():
    spec = mo.ChaosKernelSpec(HEAT, 1, 1.0)
    assert mo.eval_f_n(spec, [0.5], [0.3]) == pytest.approx(kn.heat_density(0.5, 0.3))
    assert mo.eval_f_n(spec.with_order(0), [], []) == 1.0


@given(st.lists(st.floats(0.01, 0.99), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_fn_vanishes_off_the_simplex(times, pts):
    spec = mo.ChaosKernelSpec(HEAT, 3, 1.0)
    ordered = sorted(times)
    assume(times != ordered and min(np.diff(ordered)) > 0.01)
    assert mo.eval_f_n(spec, times, pts) == 0.0
    assert mo.eval_f_n(spec, ordered, pts) > 0.0


@given(st.lists(st.floats(0.01, 0.99), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.permutations(range(3)))
def test_symmetrization_is_permutation_invariant(times, pts, perm):
    spec = mo.ChaosKernelSpec(HEAT, 3, 1.0)
    a = mo.eval_f_n_symmetrized(spec, times, pts)
    b = mo.eval_f_n_symmetrized(spec, [times[i] for i in perm], [pts[i] for i in perm])
    assert a == pytest.approx(b, rel=1e-12)
    assert a == pytest.approx(mo.eval_f_n(spec, sorted(times), [pts[i] for i in np.argsort(times)]) / 6)


# second-moment terms

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_phi_white_heat_closed_form(n):
    est = mo.phi_n(mo.ChaosKernelSpec(HEAT, n, 0.5), WW, 200_000, seed=n)
    assert within(est, mo.phi_n_white_heat(n, 0.5))
    # the diagram route gives the same number
    fd = mo.sum_F_D((n, n), mo.ChaosKernelSpec(HEAT, 0, 0.5), WW, 100_000, seed=n)
    assert within(fd, mo.phi_n_white_heat(n, 0.5), 5.0)


def test_second_moment_series_sums_to_closed_form():
    t = 0.7
    s = sum(mo.phi_n_white_heat(n, t) for n in range(60))
    assert s == pytest.approx(mo.second_moment_white_heat(t), rel=1e-12)


@given(st.integers(1, 6), st.floats(0.01, 5.0), st.floats(1.01, 3.0))
def test_phi_increases_with_t(n, t, factor):
    assert mo.phi_n_white_heat(n, t * factor) > mo.phi_n_white_heat(n, t)


def test_phi_increases_with_t_monte_carlo():
    a = mo.phi_n(mo.ChaosKernelSpec(HEAT, 2, 0.2), WW, 100_000, seed=1)
    b = mo.phi_n(mo.ChaosKernelSpec(HEAT, 2, 0.4), WW, 100_000, seed=1)
    assert b.value - a.value > 4 * math.hypot(a.std_error, b.std_error)


def test_phi1_riesz_against_direct_hls_quadrature():
    lam, t = 0.5, 0.3
    noise = nz.NoiseSpec(nz.WhiteInTime(), nz.Riesz(lam, 1))
    # Phi_1 = int_0^t <G_s, G_s * |.|^-lam> ds with the inner product from the physical-space route
    c1 = hls.hls_mass_direct(HEAT, noise, 1.0)
    want = c1 * t ** (1 - lam / 2) / (1 - lam / 2)
    assert want == pytest.approx(ABS_Z_NEG(lam) * 2 ** (-lam / 2) * t ** (1 - lam / 2) / (1 - lam / 2), rel=1e-6)
    est = mo.phi_n(mo.ChaosKernelSpec(HEAT, 1, t), noise, 400_000, seed=3)
    assert within(est, want)


def test_phi1_colored_time_against_2d_quadrature():
    lam, gamma, t = 0.5, 0.5, 0.4
    noise = nz.NoiseSpec(nz.PowerLaw(gamma), nz.Riesz(lam, 1))
    # <G_a, G_b * |.|^-lam> = E|N(0, a + b)|^-lam
    f = lambda s2, s1: abs(s1 - s2) ** -gamma * (2 * t - s1 - s2) ** (-lam / 2)
    half = integrate.dblquad(f, 0, t, 0, lambda s1: s1, epsabs=1e-11)[0]
    want = 2 * half * ABS_Z_NEG(lam)
    est = mo.phi_n(mo.ChaosKernelSpec(HEAT, 1, t), noise, 400_000, seed=4)
    assert within(est, want)
    fd = mo.sum_F_D((1, 1), mo.ChaosKernelSpec(HEAT, 0, t), noise, 400_000, seed=4)
    assert within(fd, want)


def test_phi2_colored_diagram_and_direct_routes_agree():
    noise = nz.NoiseSpec(nz.PowerLaw(0.5), nz.Riesz(0.5, 1))
    spec = mo.ChaosKernelSpec(HEAT, 2, 0.5)
    a = mo.phi_n(spec, noise, 200_000, seed=8)
    b = mo.sum_F_D((2, 2), spec.with_order(0), noise, 200_000, seed=9)
    assert abs(a.value - b.value) <= 4 * math.hypot(a.std_error, b.std_error)


def test_alpha_heat_phi1_against_hls_time_integral():
    # white time: Phi_1(t) = (2 pi)^-1 c_lam int_0^t Q(s) ds with Q(s) = Q(1) s^hbar
    lam, t = 0.5, 0.5
    noise = nz.NoiseSpec(nz.WhiteInTime(), nz.Riesz(lam, 1))
    spec = kn.AlphaHeat(1, 1.5)
    h = hls.closed_form_hbar(spec, lam)
    q1 = hls.spectral_mass_at(spec, noise, 1.0) * nz.riesz_fourier_constant(lam, 1) / (2 * math.pi)
    want = q1 * t ** (1 + h) / (1 + h)
    est = mo.phi_n(mo.ChaosKernelSpec(spec, 1, t), noise, 200_000, seed=5)
    assert within(est, want)


# truncated moments

def test_mean_is_preserved():
    est = mo.pth_moment_truncated(1, mo.ChaosKernelSpec(HEAT, 0, 1.0, initial_value=2.5), WW, 3)
    assert est.value == 2.5 and est.method == "closed-form" and est.std_error == 0.0


def test_second_moment_truncation_and_tail_bound():
    t = 0.25
    est = mo.pth_moment_truncated(2, mo.ChaosKernelSpec(HEAT, 0, t), WW, 3, 50_000, seed=2)
    kept = sum(mo.phi_n_white_heat(n, t) for n in range(4))
    assert within(est, kept)
    dropped = mo.second_moment_white_heat(t) - kept
    assert 0 < dropped <= est.extra["tail_bound"]


def test_odd_rows_vanish_and_caps():
    spec = mo.ChaosKernelSpec(HEAT, 0, 1.0)
    assert mo.sum_F_D((2, 1), spec, WW).value == 0.0
    with pytest.raises(DimensionCap):
        mo.pth_moment_truncated(4, spec, WW, 3)
    with pytest.raises(UnsupportedParameter):
        mo.pth_moment_truncated(5, spec, WW, 1)
    with pytest.raises(DimensionCap):
        mo.phi_n(spec.with_order(5), WW)


def test_threads_and_seeds_are_deterministic():
    spec = mo.ChaosKernelSpec(HEAT, 2, 0.5)
    a = mo.phi_n(spec, WW, 70_000, seed=42, threads=1)
    b = mo.phi_n(spec, WW, 70_000, seed=42, threads=3)
    c = mo.phi_n(spec, WW, 70_000, seed=43)
    assert (a.value, a.std_error) == (b.value, b.std_error)
    assert a.value != c.value


def test_moment_estimate_invariant():
    with pytest.raises(UnsupportedParameter):
        mo.MomentEstimate(1.0, 0.1, 0, None, "closed-form")
    with pytest.raises(UnsupportedParameter):
        mo.MomentEstimate(1.0, 0.0, 0, None, "guess")


# lower-bound construction

@pytest.mark.parametrize("p,m", [(2, 1), (2, 4), (4, 2), (6, 3), (8, 4)])
def test_restricted_integral(p, m):
    plan = mo.LowerBoundPlan(p, m, 1.0, 2.0)
    est = mo.restricted_integral_mc(plan, 200_000, seed=p + m)
    assert abs(est.value - plan.closed_form_integral()) <= 3 * est.std_error


def test_plan_checks():
    with pytest.raises(ConstraintViolated):
        mo.LowerBoundPlan(3, 3, 1.0, 1.0)
    with pytest.raises(ConstraintViolated):
        mo.LowerBoundPlan(4, 1, 1.0, 1.0)
    plan = mo.LowerBoundPlan(2, 1, 0.1, 1.0)
    with pytest.raises(ConstraintViolated):
        plan.check(2.0)
    mo.LowerBoundPlan(2, 60, 0.2, 1.0).check(2.0)
    lo, hi = plan.gap_window()
    assert hi == 3 * lo


@given(st.floats(0.05, 1.0), st.floats(0.5, 10.0), st.integers(2, 20), st.floats(0.0, 1.0),
       st.floats(0.1, 0.9), st.floats(0.1, 1.0))
def test_stirling_form_at_optimal_m(eps, t, p, a, lam, gamma):
    m0 = mo.optimal_m(eps, t, p, a, lam, gamma)
    assert mo.log_stirling_form(m0, eps, t, p, a, lam, gamma) == pytest.approx(m0, rel=1e-9)


@given(st.fractions(Fraction(-1, 2), Fraction(2), max_denominator=20),
       st.fractions(Fraction(1, 2), Fraction(3), max_denominator=20),
       st.fractions(Fraction(1, 20), Fraction(2), max_denominator=20),
       st.fractions(Fraction(1, 20), Fraction(1), max_denominator=20))
def test_optimized_exponents_match_lower_bound(a, b, lam, gamma):
    assume(b * (2 * a + 1) > lam)
    assert mo.optimized_exponents(a, b, lam, gamma) == ex.lower_exponents(a, b, lam, gamma)


def test_optimal_eps_scaling_is_consistent_with_exponents():
    # log bound ~ m0(eps_tp) ~ t^{t_exp} p^{p_exp}: check numerically by finite ratios
    a, b, lam, gamma = 0.0, 2.0, 0.5, 0.5
    te, pe = (float(v) for v in ex.lower_exponents(a, b, lam, gamma))
    m = lambda t, p: mo.optimal_m(mo.optimal_eps(t, p, a, b, lam, gamma), t, p, a, lam, gamma)
    assert math.log(m(20.0, 5) / m(10.0, 5)) / math.log(2) == pytest.approx(te, rel=1e-12)
    assert math.log(m(10.0, 10) / m(10.0, 5)) / math.log(2) == pytest.approx(pe, rel=1e-12)


# finite-difference oracle

def test_fd_exact_second_moment_converges():
    t = 0.25
    want = mo.second_moment_white_heat(t)
    errs = [abs(mo.fd_exact_second_moment(t, dx) - want) for dx in (1 / 32, 1 / 64, 1 / 128)]
    assert errs[0] > errs[1] > errs[2] and errs[2] / want < 2e-3


@pytest.mark.slow
def test_fd_simulation_matches_exact_discrete_moment():
    t, dx = 0.25, 1 / 32
    res = mo.fd_oracle_she(t, dx, n_paths=4000, seed=9)
    exact = mo.fd_exact_second_moment(t, dx)
    m2 = res.moments[2]
    assert abs(m2.value - exact) <= 4 * m2.std_error
    assert abs(res.moments[1].value - 1.0) <= 4 * res.moments[1].std_error


def test_fd_zero_noise_and_threads():
    res = mo.fd_oracle_she(0.0625, 1 / 16, n_paths=8, seed=1, noise_amplitude=0.0)
    assert np.allclose(res.samples, 1.0, atol=1e-12)
    a = mo.fd_oracle_she(0.0625, 1 / 16, n_paths=40, seed=5, threads=1, block=16)
    b = mo.fd_oracle_she(0.0625, 1 / 16, n_paths=40, seed=5, threads=2, block=8)
    assert np.array_equal(a.samples, b.samples)


def test_fd_rejects_unstable_grids():
    with pytest.raises(UnstableDiscretization):
        mo.fd_oracle_she(0.25, 1 / 16, dt=0.01)
    with pytest.raises(UnstableDiscretization):
        mo.fd_exact_second_moment(4.0, 1 / 16, L_dom=2.0)
    with pytest.raises(UnstableDiscretization):
        mo.fd_exact_second_moment(0.1, 1 / 16, dt=0.0019)
