from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import assume, given, strategies as st

from intermittency import exponents as ex
from intermittency.errors import ConstraintViolated, UnsupportedParameter

rationals = st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(3), max_denominator=50)
positive = st.fractions(min_value=Fraction(1, 50), max_value=Fraction(3), max_denominator=50)
unit = st.fractions(min_value=Fraction(1, 50), max_value=Fraction(1), max_denominator=50)


@given(rationals, positive, positive, unit)
def test_bounds_coincide_at_matched_hbar(a, b, lam, gamma):
    assume(b * (2 * a + 1) > lam)
    h = ex.matched_hbar(a, b, lam)
    assert h > -1
    assert ex.upper_exponents(h, gamma) == ex.lower_exponents(a, b, lam, gamma)
    assert ex.matching_check(a, b, lam, gamma)


@given(rationals, positive, positive, unit, st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(4),
                                                          max_denominator=50))
def test_other_hbar_does_not_match(a, b, lam, gamma, h):
    assume(b * (2 * a + 1) > lam and h != ex.matched_hbar(a, b, lam))
    assert not ex.matching_check(a, b, lam, gamma, h)


@given(rationals, positive, positive, unit)
def test_exponents_exceed_one(a, b, lam, gamma):
    assume(b * (2 * a + 1) > lam)
    t_exp, p_exp = ex.lower_exponents(a, b, lam, gamma)
    assert t_exp >= 1 and p_exp > 1
    assert isinstance(t_exp, Fraction)


def test_symbolic_identity():
    a, b, lam, g = sp.symbols("a b lambda gamma", positive=True)
    lo = ex.lower_exponents(a, b, lam, g, check=False)
    up = ex.upper_exponents(ex.matched_hbar(a, b, lam), g, check=False)
    assert all(sp.simplify(x - y) == 0 for x, y in zip(lo, up))


@pytest.mark.parametrize("kind,al,be", [("SHE", None, None), ("alpha-SHE", "3/2", None),
                                        ("SWE", None, None), ("SFD", "3/2", "4/5"), ("SFD", "2", "3/2")])
@pytest.mark.parametrize("lam,H", [("1/2", "3/4"), ("1/3", "1/2"), ("1/5", "9/10")])
def test_hurst_form_matches_rows(kind, al, be, lam, H):
    row = ex.table_row(kind, lam, H=H, alpha=al, beta=be)
    assert (row.t_exp_lower, row.p_exp_lower) == ex.closed_form_exponents(kind, lam, H, al, be)
    assert row.hurst == Fraction(H)


def test_as_fraction():
    assert ex.as_fraction("3/4") == Fraction(3, 4)
    assert ex.as_fraction(0.1) == Fraction(1, 10)
    assert ex.as_fraction(2) == 2
    with pytest.raises(UnsupportedParameter):
        ex.as_fraction("x/2")
    with pytest.raises(UnsupportedParameter):
        ex.as_fraction(True)


def test_constraints():
    with pytest.raises(ConstraintViolated):
        ex.lower_exponents(-1, 2, "1/2", 1)
    with pytest.raises(ConstraintViolated):
        ex.lower_exponents(0, 1, 1, 1)
    with pytest.raises(ConstraintViolated):
        ex.upper_exponents(-1, "1/2")
    with pytest.raises(ConstraintViolated):
        ex.table_row("SHE", "1/2", H="1/4")
    with pytest.raises(UnsupportedParameter):
        ex.table_row("SHE", "1/2", H="3/4", gamma="1/2")
    with pytest.raises(UnsupportedParameter):
        ex.kernel_ab("KPZ")


def test_table_skips_invalid_rows():
    # SFD with alpha = 3/2, beta = 4/5 needs 2 alpha beta - alpha > beta lambda, i.e. lambda < 3/8
    kinds = [r.kernel for r in ex.table("1/2", "3/4", alpha="3/2", beta="3/5")]
    assert "SFD" not in kinds and "SHE" in kinds


def test_table_row_json():
    js = ex.table_row("SWE", "1/2", H="3/4").to_json()
    assert js["hbar"] == {"exact": "3/2", "decimal": 1.5}
    assert js["matched"] is True
