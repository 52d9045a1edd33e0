"""Small-ball nondegeneracy checks.

A kernel has the small-ball property with exponents (a, b) when

    inf_{|y - x| <= eps}  G_t(B_eps(x) - y)  >=  C t^a      for 0 < t <= eps^b <= 1.

All implemented kernels are radial and translation invariant, so the mass
depends on y only through rho = |y - x|; the infimum over the ball is taken
over a grid of radii that includes the boundary rho = eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaincc

from .errors import (ConstraintViolated, QuadratureNonConvergence, SlopeMismatch,
                     UnsupportedParameter)
from .kernels import (AlphaHeat, BallMassQuery, FracDiff, Heat, KernelSpec, Wave,
                      ball_mass, kernel_to_json, shell_fraction)

T_FACTORS = (1.0, 0.5, 0.25)
SLOPE_FACTOR = 10.0


@dataclass
class SmallBallReport:
    kernel: KernelSpec
    a: float
    b: float
    grid: list                      # (eps, t) pairs
    worst_ratio: float
    passed: bool
    y_samples: int
    threshold: float
    worst_at: tuple = ()            # (eps, t, rho) of the worst ratio
    trend: float = 1.0              # worst ratio at the smallest t / at the largest t
    ratios: list = field(default_factory=list)  # per (eps, t): min over y

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "kernel": kernel_to_json(self.kernel),
            "a": self.a, "b": self.b,
            "grid": [list(g) for g in self.grid],
            "min_ratio_per_point": self.ratios,
            "worst_ratio": self.worst_ratio,
            "worst_at": list(self.worst_at),
            "trend": self.trend,
            "threshold": self.threshold,
            "y_samples": self.y_samples,
            "passed": self.passed,
        }


def y_offsets(eps: float, n: int) -> np.ndarray:
    """Distances |y - x| on a uniform grid of [0, eps], boundary included."""
    if n < 2:
        raise UnsupportedParameter("need at least two y samples (centre and boundary)")
    return eps * np.linspace(0.0, 1.0, n)


def _mass(spec: KernelSpec, t: float, rho: float, eps: float) -> float:
    d = spec.d
    y = (0.0,) * d
    x = (rho,) + (0.0,) * (d - 1)
    return ball_mass(spec, BallMassQuery(t, y, x, eps))


def inf_ball_mass(spec: KernelSpec, t: float, eps: float, n_y: int = 16):
    """(min over the y grid of the ball mass, rho attaining it)."""
    best, arg = math.inf, 0.0
    for rho in y_offsets(eps, n_y):
        m = _mass(spec, t, float(rho), eps)
        if m < best:
            best, arg = m, float(rho)
    return best, arg


def verify_small_ball(spec: KernelSpec, a: float, b: float, eps_grid, y_per_eps: int = 16,
                      threshold: float = 0.1, t_factors=T_FACTORS) -> SmallBallReport:
    """Check inf-ball-mass / t^a >= threshold on t = s eps^b, s in ``t_factors``.

    Raises :class:`SlopeMismatch` when the worst ratio at the smallest t and
    at the largest t differ by more than a factor of ten: with the right
    exponent a the ratio is scale free, with a wrong one it drifts as a
    power of t across the grid.
    """
    if not (a > -1 and b > 0):
        raise ConstraintViolated(f"need a > -1 and b > 0, got a={a}, b={b}")
    grid, ratios = [], []
    worst, worst_at = math.inf, ()
    for eps in eps_grid:
        eps = float(eps)
        if not 0.0 < eps <= 1.0:
            raise UnsupportedParameter(f"eps={eps} must lie in (0,1]")
        for s in t_factors:
            t = s * eps ** b
            m, rho = inf_ball_mass(spec, t, eps, y_per_eps)
            r = m / t ** a
            grid.append((eps, t))
            ratios.append(r)
            if r < worst:
                worst, worst_at = r, (eps, t, rho)
    ts = np.array([g[1] for g in grid])
    rs = np.array(ratios)
    lo = rs[ts == ts.min()].min()
    hi = rs[ts == ts.max()].min()
    trend = lo / hi if hi > 0 else math.inf
    report = SmallBallReport(spec, a, b, grid, float(worst), bool(worst >= threshold), y_per_eps,
                             threshold, worst_at, float(trend), [float(v) for v in ratios])
    if not 1.0 / SLOPE_FACTOR <= trend <= SLOPE_FACTOR:
        err = SlopeMismatch(
            f"ratio mass/t^a changes by a factor {trend:.3g} between t={ts.min():.3g} and "
            f"t={ts.max():.3g}; the exponent a={a} does not match the kernel")
        err.report = report
        raise err
    return report


# the exponential lower claim

def stated_claim_constant(nu: float) -> float:
    """(nu+1)^2 / (4 nu): the lower bound on c under which the claim is asserted."""
    return (nu + 1.0) ** 2 / (4.0 * nu)


def sufficient_claim_constant(nu: float) -> float:
    """Smallest c for which the one-critical-point argument goes through.

    With h(delta) = c/delta^nu + (nu+1) ln delta - delta^nu/2 - const,
    delta^(nu+1) h'(delta) = -[(nu/2) x^2 - (nu+1) x + nu c] with x = delta^nu,
    which keeps one sign iff (nu+1)^2 < 2 nu^2 c.  For nu >= 2 this is implied
    by c > (nu+1)^2/(4 nu); for nu < 2 it is the stronger condition.
    """
    return max(stated_claim_constant(nu), (nu + 1.0) ** 2 / (2.0 * nu * nu))


def exp_lower_claim_check(nu: float, delta_grid, c: float | None = None, slack: float = 1e-6):
    """Check  int_0^delta e^{-r^nu/2} dr >= c_nu^{-1} exp(-c / delta^nu)  on a grid.

    c_nu^{-1} = int_0^inf e^{-r^nu/2} dr.  By default c is
    :func:`sufficient_claim_constant` times (1 + slack), which exceeds
    (nu+1)^2/(4 nu) as the claim requires.  The margin is reported in
    normalized form,

        margin = (1 - exp(-c/delta^nu)) - (tail beyond delta) / c_nu^{-1},

    which equals LHS/c_nu^{-1} - exp(-c/delta^nu) but keeps full relative
    precision when both sides are close to their common limit.  The tail is
    integrated by quadrature and cross-checked against the incomplete gamma
    function Q(1/nu, delta^nu / 2).

    Returns (all_passed, list of per-delta dicts).
    """
    if not nu > 0:
        raise UnsupportedParameter(f"nu={nu} must be positive")
    if c is None:
        c = sufficient_claim_constant(nu) * (1.0 + slack)
    f = lambda r: math.exp(-r ** nu / 2.0)
    total, err = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    closed = 2.0 ** (1.0 / nu) * math.gamma(1.0 / nu) / nu
    if abs(total - closed) > 1e-10 * closed:
        raise QuadratureNonConvergence(f"normalization {total} vs closed form {closed}")
    rows, ok = [], True
    for delta in delta_grid:
        delta = float(delta)
        tail_q = _tail_quad(f, delta, nu)
        tail_g = gammaincc(1.0 / nu, delta ** nu / 2.0)
        if abs(tail_q / total - tail_g) > 1e-9 * max(tail_g, 1e-300) + 1e-15:
            raise QuadratureNonConvergence(
                f"tail mass at delta={delta}: quadrature {tail_q / total} vs gamma {tail_g}")
        margin = -math.expm1(-c / delta ** nu) - tail_q / total
        rows.append({"delta": delta, "c": c, "lhs": total - tail_q,
                     "rhs": total * math.exp(-c / delta ** nu), "margin": margin})
        ok &= margin > 0
    return ok, rows


def _tail_quad(f, delta, nu):
    """int_delta^inf e^{-r^nu/2} dr, split at the bulk scale for accuracy."""
    scale = 2.0 ** (1.0 / nu)
    pieces = [delta] + [v for v in (scale, 4 * scale, 16 * scale) if v > delta] + [np.inf]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        v, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        total += v
    return total


# exponential-form fit

def default_form(spec: KernelSpec):
    """(a, b', c) in  log(mass / t^a) ~ log C1 - C2 t^{b'} / eps^c."""
    if isinstance(spec, Heat):
        return 0.0, 1.0, 2.0
    if isinstance(spec, AlphaHeat):
        return 0.0, 1.0, spec.alpha
    if isinstance(spec, Wave):
        return 1.0, 1.0, 1.0
    return spec.beta - 1.0, 1.0, spec.alpha / spec.beta


def small_ball_table(spec: KernelSpec, eps_values, t_values, n_y: int = 16) -> list:
    """Rows (t, eps, inf-ball-mass) on the full product grid (t may exceed eps^b)."""
    return [(float(t), float(e), inf_ball_mass(spec, float(t), float(e), n_y)[0])
            for e in eps_values for t in t_values]


def exponential_form_fit(spec: KernelSpec, table, form=None) -> dict:
    """Least-squares fit of log(mass / t^a) = log C1 - C2 t^{b'} / eps^c.

    Rows with zero mass (the wave sphere missing the ball) are excluded and
    counted in ``excluded``.
    """
    a, bp, c = form or default_form(spec)
    xs, ys, excluded = [], [], 0
    for t, eps, m in table:
        if m <= 0:
            excluded += 1
            continue
        xs.append(-t ** bp / eps ** c)
        ys.append(math.log(m / t ** a))
    if len(xs) < 2:
        return {"C1": math.nan, "C2": math.nan, "rms": math.nan, "excluded": excluded, "n": len(xs)}
    A = np.column_stack([np.ones(len(xs)), xs])
    coef, *_ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    resid = np.array(ys) - A @ coef
    return {"C1": float(math.exp(coef[0])), "C2": float(coef[1]),
            "rms": float(np.sqrt(np.mean(resid ** 2))), "excluded": excluded, "n": len(xs)}


# Nash envelope of the stable density

def nash_envelope(d: int, alpha: float, t: float, r):
    """min(t^{-d/alpha}, t / r^{d+alpha})."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.minimum(t ** (-d / alpha), t / r ** (d + alpha))
    return float(out) if out.ndim == 0 else out


def envelope_ball_mass(d: int, alpha: float, t: float, rho: float, eps: float) -> float:
    """Ball mass of the Nash envelope, by the same shell quadrature as the kernels."""
    area = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    f = lambda r: nash_envelope(d, alpha, t, r) * area * r ** (d - 1) * float(shell_fraction(d, r, rho, eps))
    lo, hi = max(0.0, rho - eps), rho + eps
    pts = [p for p in (eps - rho, rho, t ** (1.0 / alpha)) if lo < p < hi]
    return integrate.quad(f, lo, hi, points=sorted(pts) or None, limit=400, epsrel=1e-10)[0]
