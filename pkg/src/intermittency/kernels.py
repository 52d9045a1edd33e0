"""Green's functions of the heat, fractional heat, wave and fractional diffusion equations.

All kernels are radial.  Closed forms are used for the heat and the wave
kernels in dimensions one and two.  The stable (alpha-heat) and
fractional-diffusion densities are obtained by a radial inverse Fourier
transform of

    t^(beta-1) E_{beta,beta}(-t^beta |xi|^alpha / 2)

(beta = 1 gives exp(-t |xi|^alpha / 2)).  Both obey the exact scaling

    G_t(x) = t^(beta - 1 - beta d / alpha) g(|x| t^(-beta/alpha)),

so only the reduced profile g is computed.  :class:`RadialProfile` tabulates
it once per parameter set: oscillatory quadrature between the zeros of the
Hankel weight (cos, J0 or sin(x)/x), Wynn-epsilon acceleration of the
slowly decaying part, a log-log spline on a grid of radii, and the
power-law tail series beyond a validated switch radius.

The three dimensional wave kernel is the surface measure sigma_t / (4 pi t)
and has no density; only its ball masses are available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import betainc, gammaln, gammasgn, j0, j1, jn_zeros

from .errors import (DimensionCap, MeasureKernelNoDensity, NonpositiveTime,
                     ParameterOutOfPositivityRange, QuadratureNonConvergence,
                     RadiusOutOfRange, SeriesAsymptoticMismatch, UnsupportedParameter)
from .noise import as_points
from .special import ml_switch, ml_table

MAX_PROFILE_DIM = 3


# kernel types

def _check_d(d, cap=None):
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise UnsupportedParameter(f"dimension must be a positive integer, got {d!r}")
    if cap is not None and d > cap:
        raise DimensionCap(f"dimension {d} exceeds the supported maximum {cap}")


@dataclass(frozen=True)
class Heat:
    d: int = 1

    def __post_init__(self):
        _check_d(self.d)


@dataclass(frozen=True)
class AlphaHeat:
    """Fundamental solution of u_t = -(1/2)(-Delta)^(alpha/2) u, 0 < alpha < 2."""

    d: int = 1
    alpha: float = 1.5

    def __post_init__(self):
        _check_d(self.d)
        if not 0.0 < self.alpha < 2.0:
            raise UnsupportedParameter(f"alpha={self.alpha} must lie in (0,2)")


@dataclass(frozen=True)
class Wave:
    d: int = 1

    def __post_init__(self):
        _check_d(self.d)
        if self.d > 3:
            raise UnsupportedParameter("the wave kernel is not a nonnegative measure for d >= 4")


@dataclass(frozen=True)
class FracDiff:
    """Kernel with Fourier transform t^(beta-1) E_{beta,beta}(-t^beta |xi|^alpha / 2)."""

    d: int = 1
    alpha: float = 2.0
    beta: float = 1.0

    def __post_init__(self):
        _check_d(self.d)
        if not 0.0 < self.alpha <= 2.0:
            raise UnsupportedParameter(f"alpha={self.alpha} must lie in (0,2]")
        if not 0.5 < self.beta < 2.0:
            raise UnsupportedParameter(f"beta={self.beta} must lie in (1/2,2)")
        if not fracdiff_positive(self.d, self.alpha, self.beta):
            raise ParameterOutOfPositivityRange(
                f"(d, alpha, beta) = ({self.d}, {self.alpha}, {self.beta}) is outside the ranges "
                "where the kernel is known to be nonnegative")


KernelSpec = Union[Heat, AlphaHeat, Wave, FracDiff]


def fracdiff_positive(d: int, alpha: float, beta: float) -> bool:
    """The three parameter ranges with a nonnegative fractional-diffusion kernel."""
    if 0.5 < beta <= 1.0 and 0.0 < alpha <= 2.0:
        return True
    if 1.0 < beta < 2.0 and alpha == 2.0 and d in (2, 3):
        return True
    return 1.0 < beta < 2.0 and beta <= alpha <= 2.0 and d == 1


def time_scaling(spec: KernelSpec) -> tuple[float, float]:
    """(a, b) with G_t(x) = t^a g(|x| / t^b) for the reduced profile g = G_1."""
    if isinstance(spec, Heat):
        return -spec.d / 2.0, 0.5
    if isinstance(spec, AlphaHeat):
        return -spec.d / spec.alpha, 1.0 / spec.alpha
    if isinstance(spec, Wave):
        return 2.0 - spec.d, 1.0
    b = spec.beta / spec.alpha
    return spec.beta - 1.0 - spec.d * b, b


def kernel_to_json(spec: KernelSpec) -> dict:
    if isinstance(spec, Heat):
        return {"kind": "heat", "d": spec.d}
    if isinstance(spec, AlphaHeat):
        return {"kind": "alpha_heat", "d": spec.d, "alpha": spec.alpha}
    if isinstance(spec, Wave):
        return {"kind": "wave", "d": spec.d}
    return {"kind": "frac", "d": spec.d, "alpha": spec.alpha, "beta": spec.beta}


def kernel_from_json(obj: dict) -> KernelSpec:
    try:
        kind, d = obj["kind"], int(obj.get("d", 1))
        if kind == "heat":
            return Heat(d)
        if kind == "alpha_heat":
            return AlphaHeat(d, float(obj["alpha"]))
        if kind == "wave":
            return Wave(d)
        if kind == "frac":
            return FracDiff(d, float(obj["alpha"]), float(obj["beta"]))
    except (KeyError, TypeError) as exc:
        raise UnsupportedParameter(f"malformed kernel specification: {exc}") from exc
    raise UnsupportedParameter(f"unknown kernel kind {kind!r}")


def _check_t(t):
    if not np.all(np.asarray(t) > 0):
        raise NonpositiveTime(f"time must be positive, got {t}")


def _radius(x, d):
    pts = as_points(x, d)
    return np.sqrt(np.sum(pts * pts, axis=-1))


def _out(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


# Fourier side

def kernel_fourier(spec: KernelSpec, t: float, xi):
    """Fourier transform of G_t at the frequency ``xi`` (a point of R^d)."""
    _check_t(t)
    r = _radius(xi, spec.d)
    if isinstance(spec, Heat):
        return _out(np.exp(-t * r * r / 2.0))
    if isinstance(spec, AlphaHeat):
        return _out(np.exp(-t * r ** spec.alpha / 2.0))
    if isinstance(spec, Wave):
        safe = np.where(r == 0, 1.0, r)
        return _out(np.where(r == 0, t, np.sin(t * safe) / safe))
    tab = ml_table(spec.beta, spec.beta)
    return _out(t ** (spec.beta - 1.0) * tab(t ** spec.beta * r ** spec.alpha / 2.0))


def radial_fourier(spec: KernelSpec, t: float, r):
    """Fourier transform as a function of the radius |xi| = r."""
    _check_t(t)
    r = np.abs(np.asarray(r, dtype=float))
    if spec.d == 1:
        return kernel_fourier(spec, t, r)
    pts = np.zeros(r.shape + (spec.d,))
    pts[..., 0] = r
    return kernel_fourier(spec, t, pts)


# closed-form densities

def heat_density(t: float, x, d: int = 1):
    """Gaussian density with variance t per coordinate."""
    _check_t(t)
    r = _radius(x, d)
    return _out((2.0 * math.pi * t) ** (-d / 2.0) * np.exp(-r * r / (2.0 * t)))


def wave_density(t: float, x, d: int = 1):
    """Wave kernel for d = 1, 2.  On the light cone in d = 2 the value is +inf."""
    _check_t(t)
    if d == 3:
        raise MeasureKernelNoDensity("the wave kernel in three dimensions is a surface measure")
    if d not in (1, 2):
        raise UnsupportedParameter(f"wave density is available for d=1,2, got {d}")
    r = _radius(x, d)
    if d == 1:
        return _out(np.where(r < t, 0.5, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(r < t, 1.0 / (2.0 * math.pi * np.sqrt(np.maximum(t * t - r * r, 0.0))), 0.0)
    return _out(np.where(r == t, np.inf, val))


# reduced radial profile by Hankel-type quadrature

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_SURFACE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}
_PREFACTOR = {1: 1.0 / math.pi, 2: 1.0 / (2.0 * math.pi), 3: 1.0 / (2.0 * math.pi ** 2)}


@lru_cache(maxsize=None)
def _j0_zeros(n: int) -> np.ndarray:
    return jn_zeros(0, n)


def _weight_zeros(d: int, k0: int, k1: int) -> np.ndarray:
    """Positive zeros number k0..k1-1 (0-based) of the Hankel weight in dimension d."""
    k = np.arange(k0, k1, dtype=float)
    if d == 1:
        return (k + 0.5) * math.pi
    if d == 3:
        return (k + 1.0) * math.pi
    if k1 <= 4000:
        return _j0_zeros(4000)[k0:k1]
    # McMahon's expansion polished by Newton steps
    b = (k + 0.75) * math.pi
    z = b + 1.0 / (8.0 * b) - 124.0 / (3.0 * (8.0 * b) ** 3)
    for _ in range(3):
        z = z + j0(z) / j1(z)
    return z


def _weight(d: int, x):
    if d == 1:
        return np.cos(x)
    if d == 2:
        return j0(x)
    return np.sinc(x / math.pi)


def _subdivide(edges: np.ndarray, h: float, ratio: float = 1.25) -> np.ndarray:
    """Split intervals longer than h, or spanning more than ``ratio`` in scale."""
    out = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        n = math.ceil((b - a) / h)
        if a > 0:
            n = max(n, min(math.ceil(math.log(b / a) / math.log(ratio)), 400))
        if n <= 1:
            out.append(np.array([b]))
        elif a > 0 and b / a > ratio ** 2:
            g = np.geomspace(a, b, n + 1)[1:]
            out.append(g)
        else:
            out.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(out)


def _gl_intervals(f, lo, hi):
    """Gauss-Legendre integral of f over each interval [lo_i, hi_i]."""
    a, b = lo[:, None], hi[:, None]
    half = 0.5 * (b - a)
    x = half * _GL_X[None, :] + 0.5 * (a + b)
    return (f(x) * _GL_W[None, :]).sum(axis=1) * half[:, 0]


def _gl_pieces(f, edges):
    return _gl_intervals(f, edges[:-1], edges[1:])


def wynn_epsilon(s):
    """Wynn epsilon extrapolation of the partial sums ``s``; returns (limit, error)."""
    s = [float(v) for v in s]
    n = len(s)
    e_prev = [0.0] * (n + 1)
    e_cur = list(s)
    best, err = s[-1], abs(s[-1] - s[-2]) if n > 1 else math.inf
    evens = [s[-1]]
    for k in range(1, n):
        nxt = []
        for j in range(len(e_cur) - 1):
            diff = e_cur[j + 1] - e_cur[j]
            if diff == 0.0:
                nxt.append(math.inf if k % 2 else e_cur[j + 1])
            else:
                nxt.append(e_prev[j + 1] + 1.0 / diff)
        e_prev, e_cur = e_cur, nxt
        if k % 2 == 0 and e_cur and math.isfinite(e_cur[-1]):
            evens.append(e_cur[-1])
        if len(e_cur) < 2:
            break
    if len(evens) >= 2:
        best = evens[-1]
        err = abs(evens[-1] - evens[-2])
    return best, err


class RadialProfile:
    """Reduced radial profile g(u) = (2 pi)^-d int phi(|xi|) e^{i xi.x} dxi, |x| = u.

    ``phi`` is the radial Fourier amplitude, vectorized on rho >= 0.
    ``tail_log_coef(k)`` gives (sign, log|c_k|) of the large-u expansion
    g(u) ~ sum_k c_k u^(-d - alpha k); pass None when g decays faster than
    any power, in which case g is set to zero beyond the tabulated range.
    ``rho_smooth`` is a frequency beyond which phi is monotone in modulus.
    """

    RTOL = 1e-9
    OVERLAP_RTOL = 1e-7

    def __init__(self, phi, d: int, alpha: float, rho_smooth: float, tail_log_coef=None,
                 decays_fast: bool = False, per_decade: int = 48, u_min: float = 1e-6):
        _check_d(d, MAX_PROFILE_DIM)
        self.phi, self.d, self.alpha = phi, d, alpha
        self.rho_smooth = rho_smooth
        self.decays_fast = decays_fast
        self.tail_log_coef = tail_log_coef
        self.u_min = u_min
        if tail_log_coef is not None:
            self.u_max = self._find_switch()
        else:
            self.u_max = self._find_cutoff()
        # log spacing near the origin, uniform spacing where the profile falls off
        u_mid = min(0.5, self.u_max / 2.0)
        n = max(8, int(per_decade * math.log10(u_mid / u_min)) + 1)
        u = np.concatenate([np.geomspace(u_min, u_mid, n)[:-1],
                            np.linspace(u_mid, self.u_max, int((self.u_max - u_mid) / 0.02) + 2)])
        g = np.array([self.quad(v) for v in u])
        peak = g.max()
        if np.any(g < -1e-10 * peak):
            raise QuadratureNonConvergence(
                f"negative profile value {g.min():.3e} inside the positivity range")
        if tail_log_coef is None:
            g = np.maximum(g, 1e-300)
        self._u, self._g = u, g
        self._spline = CubicSpline(np.log(u), np.log(g))
        self.g0 = self.quad(0.0)
        lu = math.log(u[1] / u[0])
        if math.isfinite(self.g0):
            # g(u) - g(0) ~ c u^q near the origin
            r = (g[1] - self.g0) / (g[0] - self.g0) if g[0] != self.g0 else 0.0
            self._slope0 = math.log(r) / lu if r > 1.0 else 2.0
        else:
            # g(u) ~ A + B u^q with q = 2 alpha - d <= 0 (B log u when q = 0)
            q = 2.0 * alpha - d
            b0, b1 = (math.log(u[0]), math.log(u[1])) if q == 0.0 else (u[0] ** q, u[1] ** q)
            self._sing = (q, (g[1] - g[0]) / (b1 - b0))
            self._sing_a = g[0] - self._sing[1] * b0

    # direct evaluation

    def quad(self, u: float) -> float:
        """g(u) by oscillatory quadrature; u = 0 uses the non-oscillatory integral."""
        d = self.d
        if u == 0.0:
            return self._quad_origin()
        f = lambda rho: self.phi(rho) * rho ** (d - 1) * _weight(d, u * rho)
        # explicit region: up to rho_smooth, then to the next zero of the weight
        h = min(0.5, math.pi / (2.0 * u))
        r_s = self.rho_smooth
        geo = np.geomspace(1e-10 * min(1.0, 1.0 / u), min(1.0, r_s), 40)
        edges = _subdivide(np.concatenate([[0.0], geo, [r_s]]), h)
        total = float(_gl_pieces(f, edges).sum())
        if self.decays_fast:
            return _PREFACTOR[d] * total
        k_end = math.ceil(r_s * u / math.pi) + 2
        z = _weight_zeros(d, 0, k_end) / u
        k_end = int(np.searchsorted(z, r_s)) + 1
        rho_end = z[k_end - 1]
        h_osc = math.pi / (2.0 * u)
        total += float(_gl_pieces(f, _subdivide(np.array([r_s, rho_end]), h_osc)).sum())
        # slowly decaying oscillatory remainder: partial sums between zeros
        zz = _weight_zeros(d, k_end - 1, k_end + 24) / u
        parts = [_subdivide(np.array([a, b]), h_osc) for a, b in zip(zz[:-1], zz[1:])]
        owner = np.concatenate([np.full(len(e) - 1, i) for i, e in enumerate(parts)])
        lo = np.concatenate([e[:-1] for e in parts])
        hi = np.concatenate([e[1:] for e in parts])
        vals = _gl_intervals(f, lo, hi)
        # extrapolate the remainder on its own so its differences are not lost to roundoff
        sums = np.concatenate([[0.0], np.cumsum(np.bincount(owner, vals))])
        rem, _ = wynn_epsilon(sums)
        err = abs(rem - wynn_epsilon(sums[:17])[0])
        val = total + rem
        # relative tolerance, with an absolute floor on the O(1) reduced scale
        if not err <= 1e-7 * abs(val) + 1e-12:
            raise QuadratureNonConvergence(
                f"oscillatory tail did not converge at u={u}: estimate {val}, error {err}, "
                f"explicit part up to rho={rho_end}")
        return _PREFACTOR[d] * val

    def _quad_origin(self) -> float:
        d = self.d
        f = lambda rho: self.phi(rho) * rho ** (d - 1)
        edges = np.concatenate([[0.0], np.geomspace(1e-10, self.rho_smooth, 200)])
        edges = _subdivide(edges, 0.5)
        total = float(_gl_pieces(f, edges).sum())
        if self.decays_fast:
            return _PREFACTOR[d] * total
        # algebraic tail rho^(d-1) phi ~ c rho^(d-1-2 alpha)
        r = self.rho_smooth
        p = d - 1.0 - 2.0 * self.alpha
        if p >= -1.0:
            return math.inf
        edges = np.geomspace(r, 1e6 * r, 2000)
        total += float(_gl_pieces(f, edges).sum())
        total += -float(f(np.array([1e6 * r]))[0]) * 1e6 * r / (p + 1.0)
        return _PREFACTOR[d] * total

    # large-u expansion

    def tail(self, u, return_error: bool = False):
        """Power-law expansion of g at large u, truncated at its smallest term."""
        u = np.asarray(u, dtype=float)
        logu = np.log(u)
        total = np.zeros_like(u)
        prev = np.full(u.shape, np.inf)
        active = np.ones(u.shape, dtype=bool)
        last = np.zeros_like(u)
        for k in range(1, 200):
            sgn, logc = self.tail_log_coef(k)
            if sgn == 0:
                continue
            lt = logc - (self.d + self.alpha * k) * logu
            mag = np.exp(lt)
            active &= mag < prev
            total = total + np.where(active, sgn * mag, 0.0)
            last = np.where(active, mag, last)
            prev = np.where(active, mag, prev)
            if not active.any():
                break
        if return_error:
            return total, last
        return total

    def _find_switch(self) -> float:
        u = 2.0
        agree = 0
        while u < 1e4:
            q = self.quad(u)
            a, last = self.tail(np.array([u]), return_error=True)
            a, last = float(a[0]), float(last[0])
            ok = abs(q - a) <= self.OVERLAP_RTOL * abs(q) and last <= 1e-3 * self.OVERLAP_RTOL * abs(a)
            agree = agree + 1 if ok else 0
            if agree == 3:
                return u / 1.25 ** 2
            u *= 1.25
        raise SeriesAsymptoticMismatch("profile quadrature and power-law tail never agreed")

    def _find_cutoff(self) -> float:
        g0 = abs(self.quad(self.u_min))
        u = 1.0
        while u < 1e3:
            if self.quad(u) < 1e-13 * g0:
                return u
            u *= 1.25
        raise QuadratureNonConvergence("profile does not decay")

    # fast evaluation

    def __call__(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        out = np.empty(u.shape)
        mid = (u >= self.u_min) & (u <= self.u_max)
        out[mid] = np.exp(self._spline(np.log(u[mid])))
        low = u < self.u_min
        if np.any(low):
            x = u[low] / self.u_min
            if math.isfinite(self.g0):
                out[low] = self.g0 + (self._g[0] - self.g0) * x ** self._slope0
            else:
                q, b = self._sing
                with np.errstate(divide="ignore"):
                    basis = np.log(u[low]) if q == 0.0 else u[low] ** q
                out[low] = np.where(u[low] == 0.0, np.inf, self._sing_a + b * basis)
        high = u > self.u_max
        if np.any(high):
            out[high] = self.tail(u[high]) if self.tail_log_coef is not None else 0.0
        return _out(out)

    def mass_within(self, u: float) -> float:
        """int_{|x| <= u} g(|x|) dx."""
        s = _SURFACE[self.d]
        f = lambda v: self(v) * v ** (self.d - 1) * s
        val, _ = integrate.quad(f, 0.0, min(u, self.u_max), limit=400, epsabs=0.0, epsrel=1e-11,
                                points=[self.u_min, 1.0] if u > 1.0 else None)
        if u > self.u_max and self.tail_log_coef is not None:
            val += self.tail_mass(self.u_max) - self.tail_mass(u)
        return val

    def tail_mass(self, u: float) -> float:
        """int_{|x| > u} of the tail expansion (0 when g decays faster than powers)."""
        if self.tail_log_coef is None or math.isinf(u):
            return 0.0
        s = _SURFACE[self.d]
        total, prev = 0.0, math.inf
        for k in range(1, 200):
            sgn, logc = self.tail_log_coef(k)
            if sgn == 0:
                continue
            mag = math.exp(logc - self.alpha * k * math.log(u)) / (self.alpha * k)
            if mag >= prev:
                break
            total += sgn * mag
            prev = mag
        return s * total


def _stable_tail_coef(d, alpha, beta):
    """Coefficients of g(u) ~ sum_k c_k u^(-d-alpha k) from the small-xi expansion of phi."""
    def coef(k):
        x = -alpha * k / 2.0
        if x == math.floor(x):
            return 0, -math.inf
        sgn = (-1) ** k * gammasgn(beta * k + beta) * gammasgn((d + alpha * k) / 2.0) * gammasgn(x)
        logc = (k * (alpha - 1.0) * math.log(2.0) - gammaln(beta * k + beta)
                + gammaln((d + alpha * k) / 2.0) - gammaln(x) - d / 2.0 * math.log(math.pi))
        return int(sgn), float(logc)
    return coef


@lru_cache(maxsize=32)
def reduced_profile(spec: KernelSpec) -> RadialProfile:
    """Cached reduced profile of an AlphaHeat or FracDiff kernel (t = 1)."""
    if isinstance(spec, AlphaHeat):
        alpha, beta = spec.alpha, 1.0
        phi = lambda rho: np.exp(-rho ** alpha / 2.0)
        rho_s, fast = (2.0 * 46.0) ** (1.0 / alpha), True
    elif isinstance(spec, FracDiff):
        alpha, beta = spec.alpha, spec.beta
        tab = ml_table(beta, beta)
        phi = lambda rho: tab(rho ** alpha / 2.0)
        if beta == 1.0:
            rho_s, fast = (2.0 * 46.0) ** (1.0 / alpha), True
        else:
            rho_s, fast = (2.0 * ml_switch(beta, beta)) ** (1.0 / alpha), False
    else:
        raise UnsupportedParameter(f"{type(spec).__name__} has a closed form, not a tabulated profile")
    _check_d(spec.d, MAX_PROFILE_DIM)
    coef = _stable_tail_coef(spec.d, alpha, beta) if alpha < 2.0 else None
    return RadialProfile(phi, spec.d, alpha, rho_s, coef, decays_fast=fast)


def fracdiff_density(spec: FracDiff, t: float, x, direct: bool = False):
    """Fractional-diffusion kernel at time t and points x.

    ``direct=True`` bypasses the table and runs the oscillatory quadrature
    for every point (slow; used for cross-checks).
    """
    _check_t(t)
    if not isinstance(spec, FracDiff):
        raise UnsupportedParameter("fracdiff_density needs a FracDiff kernel")
    return _profile_density(spec, t, x, direct)


def alpha_heat_density(spec: AlphaHeat, t: float, x, direct: bool = False):
    _check_t(t)
    return _profile_density(spec, t, x, direct)


def _profile_density(spec, t, x, direct):
    a, b = time_scaling(spec)
    u = _radius(x, spec.d) / t ** b
    prof = reduced_profile(spec)
    if direct:
        g = np.array([prof.quad(float(v)) for v in np.ravel(u)]).reshape(np.shape(u))
    else:
        g = prof(u)
    return _out(t ** a * g)


def kernel_density(spec: KernelSpec, t: float, x):
    """Density of G_t at the points x; raises for the three dimensional wave kernel."""
    if isinstance(spec, Heat):
        return heat_density(t, x, spec.d)
    if isinstance(spec, Wave):
        return wave_density(t, x, spec.d)
    if isinstance(spec, AlphaHeat):
        return alpha_heat_density(spec, t, x)
    return fracdiff_density(spec, t, x)


def radial_density(spec: KernelSpec, t: float, r):
    """Kernel as a function of the radius |x| = r."""
    r = np.asarray(r, dtype=float)
    if spec.d == 1:
        return kernel_density(spec, t, r)
    pts = np.zeros(r.shape + (spec.d,))
    pts[..., 0] = r
    return kernel_density(spec, t, pts)


def total_mass(spec: KernelSpec, t: float) -> float:
    """G_t(R^d) in closed form: 1, t, or t^(beta-1)/Gamma(beta)."""
    _check_t(t)
    if isinstance(spec, (Heat, AlphaHeat)):
        return 1.0
    if isinstance(spec, Wave):
        return float(t)
    return t ** (spec.beta - 1.0) / math.gamma(spec.beta)


def total_mass_quadrature(spec: KernelSpec, t: float) -> float:
    """G_t(R^d) by integrating the computed density; an independent check of :func:`total_mass`."""
    _check_t(t)
    if isinstance(spec, Heat):
        s = _SURFACE.get(spec.d) or 2.0 * math.pi ** (spec.d / 2.0) / math.gamma(spec.d / 2.0)
        f = lambda r: heat_density(t, _axis_point(r, spec.d), spec.d) * s * r ** (spec.d - 1)
        return integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-12)[0]
    if isinstance(spec, Wave):
        if spec.d == 3:
            raise MeasureKernelNoDensity("use ball_mass for the three dimensional wave kernel")
        if spec.d == 1:
            return integrate.quad(lambda r: 2.0 * wave_density(t, r, 1), 0.0, t)[0]
        return integrate.quad(lambda th: t * math.sin(th), 0.0, math.pi / 2.0)[0]
    a, b = time_scaling(spec)
    prof = reduced_profile(spec)
    return t ** a * (t ** b) ** spec.d * (prof.mass_within(prof.u_max) + prof.tail_mass(prof.u_max))


def _axis_point(r, d):
    if d == 1:
        return r
    p = np.zeros(d)
    p[0] = r
    return p


# ball masses

@dataclass(frozen=True)
class BallMassQuery:
    """Mass G_t(B_eps(x) - y) of the kernel started at y over the ball around x."""

    t: float
    center_y: tuple
    ball_center_x: tuple
    radius_eps: float

    def __post_init__(self):
        y = tuple(float(v) for v in np.atleast_1d(self.center_y))
        x = tuple(float(v) for v in np.atleast_1d(self.ball_center_x))
        object.__setattr__(self, "center_y", y)
        object.__setattr__(self, "ball_center_x", x)
        if len(x) != len(y):
            raise UnsupportedParameter("center_y and ball_center_x must have the same dimension")
        if not self.t > 0:
            raise NonpositiveTime(f"time must be positive, got {self.t}")
        if not 0.0 < self.radius_eps <= 1.0:
            raise RadiusOutOfRange(f"radius {self.radius_eps} must lie in (0,1]")

    @property
    def offset(self) -> float:
        """Distance between y and the ball center."""
        return math.dist(self.center_y, self.ball_center_x)


def shell_fraction(d: int, r, rho: float, eps: float):
    """Fraction of the sphere |z - y| = r lying inside B_eps(x), where |x - y| = rho."""
    r = np.asarray(r, dtype=float)
    inside = r <= eps - rho
    outside = (r >= rho + eps) | (r <= rho - eps)
    if d == 1:
        # the two points y +- r; the ball is [rho - eps, rho + eps]
        frac = 0.5 * ((np.abs(r - rho) <= eps).astype(float) + (r <= eps - rho).astype(float))
        return _out(frac)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = np.clip((r * r + rho * rho - eps * eps) / (2.0 * r * rho), -1.0, 1.0)
    # normalized area of the cap {angle to x - y < theta}, cos(theta) = c
    s2 = 1.0 - c * c
    half = 0.5 * betainc((d - 1) / 2.0, 0.5, s2)
    cap = np.where(c >= 0, half, 1.0 - half)
    frac = np.where(inside, 1.0, np.where(outside, 0.0, cap))
    return _out(frac)


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_mass(spec: KernelSpec, q: BallMassQuery, rtol: float = 1e-10) -> float:
    """int_{B_eps(x)} G_t(z - y) dz by quadrature over spheres centered at y."""
    if len(q.center_y) != spec.d:
        raise UnsupportedParameter(f"query points have dimension {len(q.center_y)}, kernel {spec.d}")
    t, rho, eps, d = q.t, q.offset, q.radius_eps, spec.d
    if isinstance(spec, Wave):
        return _wave_ball_mass(d, t, rho, eps)
    lo, hi = max(0.0, rho - eps), rho + eps
    area = _sphere_area(d)

    def f(r):
        return float(radial_density(spec, t, r)) * area * r ** (d - 1) * float(shell_fraction(d, r, rho, eps))

    pts = [p for p in (eps - rho, rho) if lo < p < hi]
    if isinstance(spec, Heat):
        # the Gaussian lives on the scale sqrt(t); clip far shells
        hi_eff = min(hi, 40.0 * math.sqrt(t)) if rho < 40.0 * math.sqrt(t) else hi
        if lo >= hi_eff:
            return 0.0
        hi = hi_eff
        pts += [p for p in (math.sqrt(t),) if lo < p < hi]
    else:
        scale = t ** time_scaling(spec)[1]
        pts += [p for p in (scale,) if lo < p < hi]
    val, err = integrate.quad(f, lo, hi, points=sorted(pts) or None, limit=500,
                              epsabs=1e-15, epsrel=rtol)
    if not err <= max(1e3 * rtol * abs(val), 1e-12):
        raise QuadratureNonConvergence(f"ball mass quadrature error {err:.2e} for value {val:.6e}")
    return max(val, 0.0)


def _wave_ball_mass(d, t, rho, eps):
    if d == 1:
        # half the length of [-t, t] intersected with [rho - eps, rho + eps]
        return 0.5 * max(0.0, min(t, rho + eps) - max(-t, rho - eps))
    if d == 2:
        # r = t sin(theta) removes the inverse square-root singularity at r = t
        top = min(t, rho + eps)
        if top <= max(0.0, rho - eps):
            return 0.0
        th_max = math.asin(min(1.0, top / t))
        g = lambda th: float(shell_fraction(2, t * math.sin(th), rho, eps)) * t * math.sin(th)
        pts = [math.asin(min(1.0, p / t)) for p in (eps - rho, rho - eps) if 0 < p < top]
        return integrate.quad(g, 0.0, th_max, points=pts or None, limit=200,
                              epsabs=1e-15, epsrel=1e-12)[0]
    # d = 3: normalized surface measure of the sphere |z - y| = t, total mass t;
    # integrate the polar angle measured from the direction of x - y
    if rho == 0.0:
        return float(t) if t <= eps else 0.0
    c = (t * t + rho * rho - eps * eps) / (2.0 * t * rho)
    if c >= 1.0:
        return 0.0
    th_star = math.acos(max(-1.0, c))
    return integrate.quad(lambda th: 0.5 * t * math.sin(th), 0.0, th_star, epsabs=0.0, epsrel=1e-13)[0]


def ball_mass_closed_heat(d: int, t: float, rho: float, eps: float) -> float:
    """Heat ball mass as a noncentral chi-square probability."""
    from scipy.stats import ncx2, chi2
    if rho == 0.0:
        return float(chi2.cdf(eps * eps / t, d))
    return float(ncx2.cdf(eps * eps / t, d, rho * rho / t))
