"""Exact exponent algebra of the moment bounds.

The moments behave like exp(C t^{t_exp} p^{p_exp}).  Given the small-ball
exponents (a, b) of a kernel, the noise exponents lambda (space) and gamma
(time), and the kernel's HLS exponent hbar, the lower and upper bounds have

    lower:  t_exp = 1 + b (1 - gamma) / D,   p_exp = 1 + b / D,   D = b (2a + 1) - lambda
    upper:  t_exp = 1 + (1 - gamma) / (hbar + 1),   p_exp = 1 + 1 / (hbar + 1)

and they coincide when hbar = 2a - lambda / b.

Everything is computed with :class:`fractions.Fraction`.  The functions
only use field operations, so sympy symbols can be passed with
``check=False`` to obtain the same formulas symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .errors import ConstraintViolated, UnsupportedParameter


def as_fraction(x):
    """Coerce ints, strings ("3/4", "0.5") and floats (via their repr) to Fraction.

    Objects that are not plain numbers (e.g. sympy expressions) are returned
    unchanged.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise UnsupportedParameter("booleans are not exponents")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise UnsupportedParameter(f"cannot read {x!r} as a rational") from exc
    if isinstance(x, float):
        # repr gives the shortest decimal that round-trips, so 0.1 -> 1/10
        return Fraction(repr(x))
    return x


def check_g2(a, b, lam) -> None:
    """a > -1, b > 0 and b (2a + 1) - lambda > 0."""
    a, b, lam = as_fraction(a), as_fraction(b), as_fraction(lam)
    if not a > -1:
        raise ConstraintViolated(f"need a > -1, got a={a}")
    if not b > 0:
        raise ConstraintViolated(f"need b > 0, got b={b}")
    if not b * (2 * a + 1) - lam > 0:
        raise ConstraintViolated(f"need b(2a+1) - lambda > 0, got {b * (2 * a + 1) - lam}")


def lower_exponents(a, b, lam, gamma, check: bool = True):
    """(t_exp, p_exp) of the lower moment bound."""
    a, b, lam, gamma = map(as_fraction, (a, b, lam, gamma))
    if check:
        check_g2(a, b, lam)
    D = b * (2 * a + 1) - lam
    return 1 + b * (1 - gamma) / D, 1 + b / D


def upper_exponents(hbar, gamma, check: bool = True):
    """(t_exp, p_exp) of the upper moment bound."""
    hbar, gamma = as_fraction(hbar), as_fraction(gamma)
    if check and not hbar > -1:
        raise ConstraintViolated(f"need hbar > -1, got {hbar}")
    return 1 + (1 - gamma) / (hbar + 1), 1 + 1 / (hbar + 1)


def matched_hbar(a, b, lam):
    """hbar = 2a - lambda / b, the HLS exponent for which the bounds match."""
    a, b, lam = map(as_fraction, (a, b, lam))
    return 2 * a - lam / b


def matching_check(a, b, lam, gamma, hbar=None) -> bool:
    """True when the upper bound with ``hbar`` (default 2a - lambda/b) equals the lower bound."""
    lo = lower_exponents(a, b, lam, gamma)
    h = matched_hbar(a, b, lam) if hbar is None else as_fraction(hbar)
    if not h > -1:
        return False
    return upper_exponents(h, gamma) == lo


# kernel rows

KERNEL_NAMES = ("SHE", "alpha-SHE", "SWE", "SFD")


def kernel_ab(kind: str, alpha=None, beta=None):
    """Small-ball exponents (a, b) of each kernel family."""
    if kind == "SHE":
        return Fraction(0), Fraction(2)
    if kind == "alpha-SHE":
        return Fraction(0), as_fraction(alpha)
    if kind == "SWE":
        return Fraction(1), Fraction(1)
    if kind == "SFD":
        beta = as_fraction(beta)
        return beta - 1, as_fraction(alpha) / beta
    raise UnsupportedParameter(f"unknown kernel family {kind!r}")


@dataclass(frozen=True)
class ExponentRow:
    kernel: str
    a: Fraction
    b: Fraction
    hbar: Fraction
    lam: Fraction
    gamma: Fraction
    t_exp_lower: Fraction
    p_exp_lower: Fraction
    t_exp_upper: Fraction
    p_exp_upper: Fraction

    @property
    def hurst(self) -> Fraction:
        return 1 - self.gamma / 2

    @property
    def matched(self) -> bool:
        return (self.t_exp_lower, self.p_exp_lower) == (self.t_exp_upper, self.p_exp_upper)

    def to_json(self) -> dict:
        out = {"kernel": self.kernel}
        for key in ("a", "b", "hbar", "lam", "gamma", "t_exp_lower", "p_exp_lower",
                    "t_exp_upper", "p_exp_upper"):
            v = getattr(self, key)
            out[key] = {"exact": str(v), "decimal": float(v)}
        out["matched"] = self.matched
        return out


def table_row(kind: str, lam, H=None, gamma=None, alpha=None, beta=None) -> ExponentRow:
    """One row of the exponent table; give either the Hurst index H or gamma = 2 - 2H."""
    if (H is None) == (gamma is None):
        raise UnsupportedParameter("give exactly one of H and gamma")
    gamma = 2 - 2 * as_fraction(H) if gamma is None else as_fraction(gamma)
    if not 0 < gamma <= 1:
        raise ConstraintViolated(f"gamma={gamma} must lie in (0,1]")
    lam = as_fraction(lam)
    a, b = kernel_ab(kind, alpha, beta)
    check_g2(a, b, lam)
    h = matched_hbar(a, b, lam)
    tl, pl = lower_exponents(a, b, lam, gamma)
    tu, pu = upper_exponents(h, gamma)
    return ExponentRow(kind, a, b, h, lam, gamma, tl, pl, tu, pu)


def table(lam, H, alpha="3/2", beta="4/5") -> list:
    """All four rows; rows whose constraints fail are skipped."""
    rows = []
    for kind in KERNEL_NAMES:
        try:
            rows.append(table_row(kind, lam, H=H, alpha=alpha, beta=beta))
        except ConstraintViolated:
            continue
    return rows


def closed_form_exponents(kind: str, lam, H, alpha=None, beta=None):
    """The Hurst-index form of the exponents, written out per kernel family."""
    lam, H = as_fraction(lam), as_fraction(H)
    if kind == "SHE":
        return (4 * H - lam) / (2 - lam), (4 - lam) / (2 - lam)
    if kind == "alpha-SHE":
        al = as_fraction(alpha)
        return (2 * H * al - lam) / (al - lam), (2 * al - lam) / (al - lam)
    if kind == "SWE":
        return (2 * H + 2 - lam) / (3 - lam), (4 - lam) / (3 - lam)
    if kind == "SFD":
        al, be = as_fraction(alpha), as_fraction(beta)
        D = 2 * al * be - al - be * lam
        return (al * (2 * be + 2 * H - 2) - be * lam) / D, be * (2 * al - lam) / D
    raise UnsupportedParameter(f"unknown kernel family {kind!r}")
