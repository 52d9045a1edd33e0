"""The HLS-type mass of a kernel and the exponent hbar it grows with.

Spectral form of the mass at time t:

    Q(t) = sup_eta  int |G_t^(xi - eta)|^2 mu(xi) dxi,

with mu the (unnormalized) spectral density of the spatial covariance.
Every implemented kernel scales exactly, so Q(t) = Q(1) t^hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (InsufficientGrid, NoSpectralDensity, QuadratureNonConvergence,
                     UnsupportedParameter)
from .kernels import (AlphaHeat, FracDiff, Heat, KernelSpec, Wave, radial_fourier,
                      kernel_to_json, radial_density, time_scaling, total_mass)
from .noise import (DeltaD1, NoiseSpec, ProductHat, ProductRL, Riesz, RieszHat,
                    noise_to_json)

WAVE_ETA_POINTS = 32
QUAD_RTOL = 1e-9


def closed_form_hbar(spec: KernelSpec, lam: float) -> float:
    if isinstance(spec, Heat):
        return -lam / 2.0
    if isinstance(spec, AlphaHeat):
        return -lam / spec.alpha
    if isinstance(spec, Wave):
        return 2.0 - lam
    return 2.0 * (spec.beta - 1.0) - spec.beta * lam / spec.alpha


def _spectral_exponents(noise: NoiseSpec):
    """(Lambda, angular constant) with  int_{|xi|=r} mu dS = C r^(Lambda - 1)."""
    sc = noise.space
    if isinstance(sc, DeltaD1):
        return 1.0, 2.0
    if isinstance(sc, (Riesz, RieszHat)):
        d = sc.d
        return float(sc.lam), 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    if isinstance(sc, (ProductRL, ProductHat)):
        lams = [float(v) for v in sc.lambdas]
        ang = 2.0 * math.prod(math.gamma(v / 2.0) for v in lams) / math.gamma(sum(lams) / 2.0)
        return sum(lams), ang
    raise NoSpectralDensity(f"no spectral density for {type(sc).__name__}")


def _freq_scale(spec: KernelSpec, t: float) -> float:
    # |G_t^| varies on the frequency scale t^(-b), b the space-time scaling exponent
    return t ** (-time_scaling(spec)[1])


def _check(val, err, what):
    if not np.isfinite(val) or err > 1e-5 * abs(val) + 1e-300:
        raise QuadratureNonConvergence(f"{what}: value {val}, error estimate {err}")


def _radial_integral(spec: KernelSpec, t: float, Lam: float) -> float:
    """int_0^inf |G_t^(r)|^2 r^(Lam - 1) dr."""
    s = _freq_scale(spec, t)
    if isinstance(spec, Wave):
        return _wave_radial(t, Lam)
    g2 = lambda r: float(radial_fourier(spec, t, r)) ** 2
    # algebraic weight at the origin, then the decaying tail
    head, e1 = integrate.quad(g2, 0.0, s, weight="alg", wvar=(Lam - 1.0, 0.0),
                              epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
    tail, e2 = integrate.quad(lambda r: g2(r) * r ** (Lam - 1.0), s, np.inf,
                              epsabs=0.0, epsrel=QUAD_RTOL, limit=400)
    _check(head + tail, e1 + e2, "radial spectral integral")
    return head + tail


def _wave_radial(t: float, Lam: float) -> float:
    """int_0^inf sin^2(t r) r^(Lam - 3) dr, with the oscillatory tail done by QAWF."""
    if not 0.0 < Lam < 2.0:
        raise QuadratureNonConvergence(f"wave spectral integral diverges for Lambda={Lam}")
    A = 1.0 / t
    head, e1 = integrate.quad(lambda r: (math.sin(t * r) / r) ** 2 if r > 0 else t * t, 0.0, A,
                              weight="alg", wvar=(Lam - 1.0, 0.0), epsabs=0.0, epsrel=QUAD_RTOL,
                              limit=200)
    # sin^2 = (1 - cos 2tr) / 2
    smooth = 0.5 * A ** (Lam - 2.0) / (2.0 - Lam)
    osc, e2 = integrate.quad(lambda r: r ** (Lam - 3.0), A, np.inf, weight="cos", wvar=2.0 * t,
                             epsabs=1e-10 * smooth, limlst=200)
    val = head + smooth - 0.5 * osc
    _check(val, e1 + 0.5 * e2, "wave spectral integral")
    return val


def _wave_shifted(t: float, Lam: float, eta: float) -> float:
    """int_R sin^2(t(xi - eta)) / (xi - eta)^2 |xi|^(Lam - 1) dxi in one dimension."""
    if eta == 0.0:
        return 2.0 * _wave_radial(t, Lam)
    eta = abs(eta)
    q = lambda z: (math.sin(t * z) / z) ** 2 if z != 0 else t * t
    R = eta + 8.0 / t
    lo = -R
    total, err = 0.0, 0.0
    # the origin singularity takes the algebraic weight from both sides
    for a, b, sign in ((0.0, R, 1.0), (0.0, R, -1.0)):
        v, e = integrate.quad(lambda x: q(sign * x - eta), a, b, weight="alg",
                              wvar=(Lam - 1.0, 0.0), points=None, epsabs=0.0,
                              epsrel=QUAD_RTOL, limit=400)
        total += v
        err += e
    # tails |xi| > R: sin^2 = (1 - cos)/2 against w(xi) = |xi|^(Lam-1)/(xi - eta)^2
    for sign in (1.0, -1.0):
        w = lambda x: x ** (Lam - 1.0) / (sign * x - eta) ** 2
        v0, e0 = integrate.quad(w, R, np.inf, epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
        # cos(2t(sign x - eta)) = cos(2tx) cos(2t eta) + sign sin(2tx) sin(2t eta)
        vc, ec = integrate.quad(w, R, np.inf, weight="cos", wvar=2.0 * t, epsabs=1e-10 * v0,
                                limlst=200)
        vs, es = integrate.quad(w, R, np.inf, weight="sin", wvar=2.0 * t, epsabs=1e-10 * v0,
                                limlst=200)
        osc = vc * math.cos(2 * t * eta) + sign * vs * math.sin(2 * t * eta)
        total += 0.5 * (v0 - osc)
        err += e0 + ec + es
    _check(total, err, "shifted wave spectral integral")
    return total


def eta_grid(spec: KernelSpec, t: float, n: int | None = None) -> np.ndarray:
    """{0, s, 2s, ...} with s = t^(-b); a single point unless the kernel is a wave."""
    if n is None:
        n = WAVE_ETA_POINTS if isinstance(spec, Wave) and spec.d == 1 else 1
    return _freq_scale(spec, t) * np.arange(n, dtype=float) / 4.0


def spectral_mass_at(spec: KernelSpec, noise: NoiseSpec, t: float, eta: float = 0.0) -> float:
    """int |G_t^(xi - eta)|^2 mu(xi) dxi for eta on the first axis."""
    if spec.d != noise.d:
        raise UnsupportedParameter(f"kernel dimension {spec.d} != noise dimension {noise.d}")
    if not t > 0:
        raise UnsupportedParameter(f"t={t} must be positive")
    Lam, ang = _spectral_exponents(noise)
    if eta == 0.0:
        return ang * _radial_integral(spec, t, Lam)
    if isinstance(spec, Wave) and spec.d == 1:
        return _wave_shifted(t, Lam, eta)
    raise UnsupportedParameter("shifted spectral masses are implemented for the 1-d wave kernel only")


@dataclass
class SpectralMass:
    value: float
    argmax_eta: float
    etas: list = field(default_factory=list)
    values: list = field(default_factory=list)


def hls_mass_spectral(spec: KernelSpec, noise: NoiseSpec, t: float, n_eta: int | None = None,
                      detail: bool = False):
    """sup over the eta grid of the spectral mass.

    For heat, alpha-heat and fractional diffusion |G_t^|^2 is radially
    decreasing and so is mu, hence the convolution peaks at eta = 0 and the
    grid is the single point 0.  The 1-d wave kernel is scanned over
    :data:`WAVE_ETA_POINTS` points; in d >= 2 the wave kernel is taken at
    eta = 0 only.
    """
    etas = eta_grid(spec, t, n_eta) if (isinstance(spec, Wave) and spec.d == 1) else np.zeros(1)
    vals = [spectral_mass_at(spec, noise, t, float(e)) for e in etas]
    k = int(np.argmax(vals))
    res = SpectralMass(float(vals[k]), float(etas[k]), [float(e) for e in etas], [float(v) for v in vals])
    return res if detail else res.value


# direct (physical space) forms

def hls_mass_direct(spec: KernelSpec, noise: NoiseSpec, t: float) -> float:
    """int int G_t(y) G_t(y') Lambda(y - y') dy dy' in one dimension.

    Equals (2 pi)^-1 c_lambda times the spectral mass at eta = 0, where c_lambda
    is the Fourier constant of |x|^-lambda; an independent check of the
    spectral route.  Computed as int (G_t * G_t)(w) |w|^-lambda dw with the
    autocorrelation obtained by quadrature.
    """
    if spec.d != 1 or not isinstance(noise.space, Riesz):
        raise UnsupportedParameter("the direct form is implemented for d = 1 Riesz noise")
    lam = noise.space.lam
    g = lambda y: float(radial_density(spec, t, abs(y)))
    half = _support_radius(spec, t)

    def auto(w):
        lo, hi = max(-half, w - half), min(half, w + half)
        if lo >= hi:
            return 0.0
        pts = [p for p in (0.0, w) if lo < p < hi]
        return integrate.quad(lambda y: g(y) * g(y - w), lo, hi, points=pts or None,
                              epsabs=0.0, epsrel=1e-10, limit=200)[0]

    val, err = integrate.quad(auto, 0.0, 2.0 * half, weight="alg", wvar=(-lam, 0.0),
                              epsabs=0.0, epsrel=1e-8, limit=200)
    _check(val, err, "direct HLS mass")
    return 2.0 * val


def _support_radius(spec, t):
    if isinstance(spec, Wave):
        return t
    if isinstance(spec, Heat):
        return 40.0 * math.sqrt(t)
    raise UnsupportedParameter("the direct form supports the heat and wave kernels")


def weighted_mass(spec: KernelSpec, noise: NoiseSpec, t: float, n_x: int = 9):
    """(total mass, sup_x int G_t(x - y) Lambda(y) dy) in one dimension.

    The sup is taken over x = 0, s/4, ..., 2s with s = t^b the spatial scale
    of the kernel; for spatial white noise the weighted integral is G_t(x).
    """
    if spec.d != 1:
        raise UnsupportedParameter("weighted_mass is implemented for d = 1")
    tot = total_mass(spec, t)
    sc = noise.space
    scale = t ** time_scaling(spec)[1]
    xs = np.linspace(0.0, 2.0 * scale, n_x)
    if isinstance(sc, DeltaD1):
        vals = [float(radial_density(spec, t, x)) for x in xs]
        return tot, max(vals)
    if not isinstance(sc, Riesz):
        raise UnsupportedParameter("weighted_mass needs Riesz or delta spatial covariance")
    lam = sc.lam
    vals = [_weighted_at(spec, t, lam, float(x)) for x in xs]
    return tot, max(vals)


def _weighted_at(spec, t, lam, x):
    """int G_t(x - y) |y|^-lambda dy."""
    g = lambda y: float(radial_density(spec, t, abs(x - y)))
    if isinstance(spec, Wave):
        lo, hi = x - t, x + t
        bounds = [lo, hi]
    else:
        R = 40.0 * t ** time_scaling(spec)[1]
        bounds = [x - R, x + R]
    total, err = 0.0, 0.0
    # split at the covariance singularity y = 0 with the algebraic weight on each side
    lo, hi = bounds
    if lo < 0.0 < hi:
        for a, b, sgn in ((0.0, hi, 1.0), (0.0, -lo, -1.0)):
            v, e = integrate.quad(lambda y: g(sgn * y), a, b, weight="alg", wvar=(-lam, 0.0),
                                  epsabs=0.0, epsrel=1e-10, limit=200)
            total += v
            err += e
    else:
        v, e = integrate.quad(lambda y: g(y) * abs(y) ** -lam, lo, hi, epsabs=0.0, epsrel=1e-10,
                              limit=200)
        total, err = v, e
    if not isinstance(spec, Wave):
        # heavy tails beyond the window (alpha-stable and fractional kernels)
        for a, sgn in ((hi, 1.0), (-lo, -1.0)):
            if a > 0:
                v, e = integrate.quad(lambda y: g(sgn * y) * y ** -lam, a, np.inf, epsabs=0.0,
                                      epsrel=1e-10, limit=200)
                total += v
                err += e
    _check(total, err, "weighted mass")
    return total


# exponent fit

@dataclass
class HlsReport:
    kernel: KernelSpec
    noise: NoiseSpec
    t_grid: list
    values: list
    fitted_hbar: float
    closed_form_hbar: float
    abs_gap: float
    argmax_eta: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "kernel": kernel_to_json(self.kernel),
            "noise": noise_to_json(self.noise),
            "t_grid": self.t_grid,
            "values": self.values,
            "argmax_eta": self.argmax_eta,
            "fitted_hbar": self.fitted_hbar,
            "closed_form_hbar": self.closed_form_hbar,
            "abs_gap": self.abs_gap,
        }


def check_t_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 8:
        raise InsufficientGrid(f"need at least 8 t values, got {t.size}")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise InsufficientGrid("t grid must be positive and strictly increasing")
    if t.max() > 0.1:
        raise InsufficientGrid(f"all t must be <= 0.1, got max {t.max()}")
    if math.log10(t.max() / t.min()) < 2.0 - 1e-12:
        raise InsufficientGrid("t grid must span at least two decades")
    r = np.diff(np.log(t))
    if np.ptp(r) > 1e-6 * r.mean():
        raise InsufficientGrid("t grid must be log spaced")
    return t


def fit_hbar(spec: KernelSpec, noise: NoiseSpec, t_grid) -> HlsReport:
    """Least-squares slope of log Q(t) against log t."""
    t = check_t_grid(t_grid)
    res = [hls_mass_spectral(spec, noise, float(s), detail=True) for s in t]
    vals = np.array([r.value for r in res])
    if np.any(vals <= 0):
        raise QuadratureNonConvergence("nonpositive HLS mass")
    slope = float(np.polyfit(np.log(t), np.log(vals), 1)[0])
    closed = closed_form_hbar(spec, noise.lam)
    return HlsReport(spec, noise, [float(v) for v in t], [float(v) for v in vals], slope, closed,
                     abs(slope - closed), [r.argmax_eta for r in res])


def scaling_spread(spec: KernelSpec, noise: NoiseSpec, t_grid, hbar: float | None = None) -> float:
    """Relative spread (max - min)/mean of Q(t) / t^hbar at eta = 0."""
    hbar = closed_form_hbar(spec, noise.lam) if hbar is None else hbar
    r = np.array([spectral_mass_at(spec, noise, float(s)) / s ** hbar for s in t_grid])
    return float(np.ptp(r) / r.mean())
