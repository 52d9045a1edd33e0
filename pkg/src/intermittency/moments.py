"""Chaos kernels, second-moment terms, diagram integrals and moment estimates.

The mild solution with constant initial value I_0 has chaos kernels

    f_n(t, x; t_1, x_1, ..., t_n, x_n)
        = I_0 G_{t - t_n}(x - x_n) G_{t_n - t_{n-1}}(x_n - x_{n-1}) ... G_{t_2 - t_1}(x_2 - x_1)

on the ordered simplex 0 < t_1 < ... < t_n < t, and

    E[ prod_k u(t, x) ] = sum_{n_1..n_p} sum_{D admissible} F_D(f_{n_1}, ..., f_{n_p}).

All Monte Carlo estimators split the samples into fixed-size blocks.  Block
j draws from ``SeedSequence(seed, spawn_key=(stream, j))`` and block results
are merged in block order, so the output does not depend on ``threads``.
"""

from __future__ import annotations

import itertools
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from . import diagrams as dg
from . import exponents as ex
from .errors import (ConstraintViolated, DimensionCap, MeasureKernelNoDensity,
                     SingularityNotIntegrable, UnstableDiscretization, UnsupportedParameter)
from .hls import closed_form_hbar
from .kernels import AlphaHeat, FracDiff, Heat, KernelSpec, Wave, kernel_density, time_scaling
from .noise import (DeltaD1, NoiseSpec, PowerLaw, ProductHat, ProductRL, Riesz, RieszHat,
                    WhiteInTime, as_points)

BLOCK = 1 << 15
MAX_VERTICES = 8


# data types

@dataclass(frozen=True)
class ChaosKernelSpec:
    kernel: KernelSpec
    n: int
    t: float
    x: tuple = ()
    initial_value: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise UnsupportedParameter(f"chaos order n={self.n} must be a nonnegative integer")
        if not self.t > 0:
            raise UnsupportedParameter(f"horizon t={self.t} must be positive")
        x = tuple(float(v) for v in np.atleast_1d(self.x)) if np.size(self.x) else (0.0,) * self.kernel.d
        if len(x) != self.kernel.d:
            raise UnsupportedParameter(f"x has {len(x)} coordinates, kernel lives in R^{self.kernel.d}")
        object.__setattr__(self, "x", x)

    def with_order(self, n: int) -> "ChaosKernelSpec":
        return ChaosKernelSpec(self.kernel, n, self.t, self.x, self.initial_value)


METHODS = ("MC", "quadrature", "closed-form")


@dataclass
class MomentEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int | None
    method: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise UnsupportedParameter(f"unknown method {self.method!r}")
        if self.method != "MC" and self.std_error != 0.0:
            raise UnsupportedParameter("only Monte Carlo estimates carry a standard error")
        if self.std_error < 0:
            raise UnsupportedParameter("negative standard error")

    def to_json(self) -> dict:
        out = {"value": self.value, "std_error": self.std_error, "n_samples": self.n_samples,
               "seed": self.seed, "method": self.method}
        out.update(self.extra)
        return out


# chaos kernels

def _log_density(kernel: KernelSpec, g, z):
    """log G_g(z) for arrays of positive gaps g (N,) and displacements z (N, d)."""
    if isinstance(kernel, Heat):
        d = kernel.d
        return -0.5 * d * np.log(2.0 * math.pi * g) - np.sum(z * z, axis=-1) / (2.0 * g)
    if isinstance(kernel, Wave) and kernel.d == 3:
        raise MeasureKernelNoDensity("the three dimensional wave kernel has no density")
    pts = z[..., 0] if kernel.d == 1 else z
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(kernel_density(kernel, g, pts), dtype=float))


def eval_f_n(spec: ChaosKernelSpec, times, points) -> float:
    """f_n at one point of (time, space)^n; zero off the ordered simplex."""
    n, d = spec.n, spec.kernel.d
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size != n:
        raise UnsupportedParameter(f"need {n} times, got {times.size}")
    pts = np.asarray(points, dtype=float).reshape(n, d) if n else np.zeros((0, d))
    if n == 0:
        return float(spec.initial_value)
    full_t = np.append(times, spec.t)
    if not (times[0] > 0 and np.all(np.diff(full_t) > 0)):
        return 0.0
    full_x = np.vstack([pts, np.asarray(spec.x)[None, :]])
    gaps = np.diff(full_t)
    disp = np.diff(full_x, axis=0)
    return float(spec.initial_value * np.exp(np.sum(_log_density(spec.kernel, gaps, disp))))


def eval_f_n_symmetrized(spec: ChaosKernelSpec, times, points) -> float:
    """Average of f_n over the n! relabelings of the variables."""
    n, d = spec.n, spec.kernel.d
    times = np.asarray(times, dtype=float).reshape(-1)
    pts = np.asarray(points, dtype=float).reshape(n, d)
    total = 0.0
    for perm in itertools.permutations(range(n)):
        total += eval_f_n(spec, times[list(perm)], pts[list(perm)])
    return total / math.factorial(n)


# proposals

def gap_exponent(kernel: KernelSpec, noise: NoiseSpec) -> float:
    """Power a of the time-gap proposal q(g) ~ g^-a.

    A pair of kernels at gap g tied together by the covariance integrates to
    g^hbar in space, so a = -hbar (clipped to [0, 0.9]) flattens the weight.
    """
    return float(min(0.9, max(0.0, -closed_form_hbar(kernel, noise.lam))))


def _sample_gap(rng, T, a):
    """g in (0, T) with density (1 - a) g^-a / T^(1 - a); returns (g, log q)."""
    u = rng.random(T.shape)
    u = np.where(u == 0.0, 0.5, u)
    g = T * u ** (1.0 / (1.0 - a))
    return g, math.log(1.0 - a) - a * np.log(g) - (1.0 - a) * np.log(T)


def _sample_step(rng, kernel: KernelSpec, g):
    """Displacement z ~ q(. | g) with the kernel's spatial scale; returns (z, log q)."""
    n, d = g.shape[0], kernel.d
    if isinstance(kernel, Heat):
        z = rng.standard_normal((n, d)) * np.sqrt(g)[:, None]
        return z, -0.5 * d * np.log(2.0 * math.pi * g) - np.sum(z * z, axis=1) / (2.0 * g)
    if isinstance(kernel, Wave):
        if d == 1:
            z = (2.0 * rng.random(n) - 1.0) * g
            return z[:, None], -np.log(2.0 * g)
        if d == 2:
            # exact draw from the normalized kernel: |z| = g sin(theta)
            th = 0.5 * math.pi * rng.random(n)
            ph = 2.0 * math.pi * rng.random(n)
            r = g * np.sin(th)
            z = np.column_stack([r * np.cos(ph), r * np.sin(ph)])
            return z, -np.log(2.0 * math.pi * g * g * np.cos(th))
        raise MeasureKernelNoDensity("the three dimensional wave kernel has no density")
    # heavy-tailed kernels: Cauchy in each coordinate at the kernel scale
    s = (g ** time_scaling(kernel)[1])[:, None]
    c = rng.standard_cauchy((n, d)) * s
    return c, np.sum(np.log(s / (math.pi * (s * s + c * c))), axis=1)


def _radial_powerlaw(rng, n, kappa, rho):
    """r with density ~ r^kappa on (0, rho] and ~ rho^kappa (rho/r)^2 beyond; (r, log q_r)."""
    p0 = 1.0 / (kappa + 2.0)
    logZ = (kappa + 1.0) * math.log(rho) + math.log(1.0 / (kappa + 1.0) + 1.0)
    u, v = rng.random(n), rng.random(n)
    v = np.where(v == 0.0, 0.5, v)
    inner = u < p0
    r = np.where(inner, rho * v ** (1.0 / (kappa + 1.0)), rho / v)
    logq = np.where(inner, kappa * np.log(r), kappa * math.log(rho) + 2.0 * np.log(rho / r)) - logZ
    return r, logq


def _sphere_log_area(d):
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - math.lgamma(d / 2.0)


def _sample_space_offset(rng, sc, d, n, rho):
    """w with log[Lambda(w) / q(w)] for Riesz and product covariances."""
    if isinstance(sc, (Riesz, RieszHat)):
        lam = sc.lam
        r, logq = _radial_powerlaw(rng, n, d - 1.0 - lam, rho)
        if d == 1:
            dirs = np.where(rng.random(n) < 0.5, -1.0, 1.0)[:, None]
        else:
            dirs = rng.standard_normal((n, d))
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        w = r[:, None] * dirs
        # q(w) = q_r(r) / (|S^{d-1}| r^{d-1}),  Lambda(w) = r^-lam
        lw = -lam * np.log(r) - (logq - _sphere_log_area(d) - (d - 1.0) * np.log(r))
        return w, lw
    if isinstance(sc, (ProductRL, ProductHat)):
        cols, lw = [], np.zeros(n)
        for lam in sc.lambdas:
            r, logq = _radial_powerlaw(rng, n, -lam, rho)
            cols.append(np.where(rng.random(n) < 0.5, -r, r))
            lw += -lam * np.log(r) - (logq - math.log(2.0))
        return np.column_stack(cols), lw
    raise UnsupportedParameter(f"no spatial offset sampler for {type(sc).__name__}")


def _sample_time_offset(rng, gamma, t, n):
    """s in [-t, t] with density ~ |s|^-gamma; the weight |s|^-gamma / q(s) is constant."""
    u = rng.random(n)
    u = np.where(u == 0.0, 0.5, u)
    s = t * u ** (1.0 / (1.0 - gamma)) * np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return s, np.full(n, math.log(2.0 * t ** (1.0 - gamma) / (1.0 - gamma)))


def _check_noise(kernel: KernelSpec, noise: NoiseSpec):
    if kernel.d != noise.d:
        raise UnsupportedParameter(f"kernel dimension {kernel.d} != noise dimension {noise.d}")
    if not noise.gamma <= 1.0:
        raise SingularityNotIntegrable(f"time exponent gamma={noise.gamma} >= 1")
    if not 0.0 < noise.lam <= noise.d:
        raise SingularityNotIntegrable(f"space exponent lambda={noise.lam} outside (0, d]")
    if isinstance(kernel, Wave) and kernel.d == 3:
        raise MeasureKernelNoDensity("the three dimensional wave kernel has no density")


# block-parallel Monte Carlo driver

def _run_blocks(block_fn, n_samples: int, seed: int, stream: tuple, threads: int = 1):
    """Mean and standard error of i.i.d. weights produced block by block."""
    if n_samples < 2:
        raise UnsupportedParameter("need at least two samples")
    sizes = [BLOCK] * (n_samples // BLOCK)
    if n_samples % BLOCK:
        sizes.append(n_samples % BLOCK)

    key = tuple(zlib.crc32(v.encode()) if isinstance(v, str) else int(v) for v in stream)

    def one(j):
        ss = np.random.SeedSequence(int(seed), spawn_key=key + (j,))
        w = block_fn(np.random.default_rng(ss), sizes[j])
        return float(np.sum(w)), float(np.sum(w * w))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(j) for j in range(len(sizes))]
    s = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)


# diagram integrals

def _diagram_weights(rng, n, diagram: dg.Diagram, spec: ChaosKernelSpec, noise: NoiseSpec, a_gap):
    kernel, t = spec.kernel, spec.t
    d = kernel.d
    x0 = np.asarray(spec.x)[None, :]
    partner = {}
    for u, v in diagram.edges:
        partner[v] = u
    white_t = isinstance(noise.time, WhiteInTime)
    white_x = isinstance(noise.space, DeltaD1)
    rho = t ** time_scaling(kernel)[1]
    T, X = {}, {}
    logw = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    for k, size in enumerate(diagram.row_sizes, start=1):
        for r in range(size, 0, -1):
            v = (k, r)
            if v in partner:
                u = partner[v]
                if white_t:
                    T[v] = T[u]
                else:
                    s, lw = _sample_time_offset(rng, noise.gamma, t, n)
                    T[v] = T[u] + s
                    logw += lw
                if white_x:
                    X[v] = X[u]
                else:
                    w, lw = _sample_space_offset(rng, noise.space, d, n, rho)
                    X[v] = X[u] + w
                    logw += lw
            else:
                if r == size:
                    Ta, Xa = np.full(n, t), np.repeat(x0, n, axis=0)
                else:
                    Ta, Xa = T[(k, r + 1)], X[(k, r + 1)]
                ok = Ta > 0
                alive &= ok
                Ta = np.where(ok, Ta, t)
                g, lq = _sample_gap(rng, Ta, a_gap)
                z, lqz = _sample_step(rng, kernel, g)
                T[v], X[v] = Ta - g, Xa + z
                logw -= lq + lqz
    # integrand: each row's chain with the simplex indicator
    for k, size in enumerate(diagram.row_sizes, start=1):
        if size == 0:
            continue
        ts = np.column_stack([T[(k, r)] for r in range(1, size + 1)] + [np.full(n, t)])
        alive &= ts[:, 0] > 0
        gaps = np.diff(ts, axis=1)
        alive &= np.all(gaps > 0, axis=1)
        for r in range(1, size + 1):
            xa = X[(k, r + 1)] if r < size else np.repeat(x0, n, axis=0)
            g = np.where(alive, gaps[:, r - 1], 1.0)
            logw += _log_density(kernel, g, xa - X[(k, r)])
    p = len(diagram.row_sizes)
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.where(alive, np.exp(np.where(alive, logw, 0.0)), 0.0)
    return spec.initial_value ** p * w


def eval_F_D(diagram: dg.Diagram, spec: ChaosKernelSpec, noise: NoiseSpec, n_samples: int = 100_000,
             seed: int = 0, threads: int = 1, stream: tuple = ()) -> MomentEstimate:
    """Monte Carlo value of F_D(f_{n_1}, ..., f_{n_p}); the row sizes come from the diagram.

    Vertices are visited row by row, each row from the last time variable
    down.  An upper vertex is drawn from its row's chain (a power-law time
    gap and a kernel-scaled spatial step); a lower vertex is placed relative
    to its upper partner (equal for delta covariances, otherwise offset by
    power-law draws matched to |s|^-gamma and |w|^-lambda).
    """
    if sum(diagram.row_sizes) > MAX_VERTICES:
        raise DimensionCap(f"{sum(diagram.row_sizes)} vertices exceed the Monte Carlo cap {MAX_VERTICES}")
    _check_noise(spec.kernel, noise)
    a = gap_exponent(spec.kernel, noise)
    fn = lambda rng, n: _diagram_weights(rng, n, diagram, spec, noise, a)
    mean, se = _run_blocks(fn, n_samples, seed, stream, threads)
    return MomentEstimate(mean, se, n_samples, seed, "MC")


def sum_F_D(row_sizes, spec: ChaosKernelSpec, noise: NoiseSpec, n_samples: int = 100_000,
            seed: int = 0, threads: int = 1, stream: tuple = ()) -> MomentEstimate:
    """Sum of F_D over all admissible diagrams with the given rows (0 for odd totals)."""
    sizes = tuple(int(v) for v in row_sizes)
    if sum(sizes) % 2:
        return MomentEstimate(0.0, 0.0, 0, seed, "closed-form", {"n_diagrams": 0})
    if sum(sizes) == 0:
        return MomentEstimate(spec.initial_value ** len(sizes), 0.0, 0, seed, "closed-form",
                              {"n_diagrams": 1})
    tot, var, count = 0.0, 0.0, 0
    for j, D in enumerate(dg.enumerate_admissible(sizes)):
        est = eval_F_D(D, spec, noise, n_samples, seed, threads, tuple(stream) + (j,))
        tot += est.value
        var += est.std_error ** 2
        count += 1
    if count == 0:
        return MomentEstimate(0.0, 0.0, 0, seed, "closed-form", {"n_diagrams": 0})
    return MomentEstimate(tot, math.sqrt(var), n_samples * count, seed, "MC", {"n_diagrams": count})


# second-moment terms by the direct path

def _dirichlet_times(rng, n, order, t, a):
    """Ordered times 0 < t_1 < ... < t_n < t from Dirichlet gaps.

    The n kernel gaps t - t_n, ..., t_2 - t_1 have parameter 1 - a and the
    free gap t_1 has parameter 1.  Returns (times (N, n), log density).
    """
    alphas = np.array([1.0 - a] * order + [1.0])
    gam = rng.gamma(alphas, size=(n, order + 1))
    gaps = t * gam / gam.sum(axis=1, keepdims=True)
    gaps = np.maximum(gaps, 1e-300)
    # times counted from t downwards: t_n = t - gap_0, t_{n-1} = t_n - gap_1, ...
    down = t - np.cumsum(gaps[:, :order], axis=1)
    times = down[:, ::-1]
    logq = (gammaln(alphas.sum()) - np.sum(gammaln(alphas))
            + np.sum((alphas - 1.0) * np.log(gaps / t), axis=1) - order * math.log(t))
    return times, logq


def _chain_points(rng, kernel, times, t, x0):
    """Spatial chain x_n, ..., x_1 drawn backwards from x0 with kernel-scaled steps."""
    n, order = times.shape
    full = np.column_stack([times, np.full(n, t)])
    gaps = np.diff(full, axis=1)
    pts = np.empty((n, order, kernel.d))
    logq = np.zeros(n)
    cur = np.repeat(x0[None, :], n, axis=0)
    for j in range(order - 1, -1, -1):
        z, lq = _sample_step(rng, kernel, gaps[:, j])
        cur = cur + z
        pts[:, j] = cur
        logq += lq
    return pts, logq


def _log_chain(kernel, times, pts, t, x0):
    """log f_n / I_0 for sampled (times, points); -inf off the simplex."""
    n, order = times.shape
    full_t = np.column_stack([times, np.full(n, t)])
    gaps = np.diff(full_t, axis=1)
    ok = (times[:, 0] > 0) & np.all(gaps > 0, axis=1)
    full_x = np.concatenate([pts, np.repeat(x0[None, None, :], n, axis=0)], axis=1)
    out = np.zeros(n)
    for j in range(order):
        g = np.where(ok, gaps[:, j], 1.0)
        out += _log_density(kernel, g, full_x[:, j + 1] - full_x[:, j])
    return np.where(ok, out, -np.inf)


def _phi_weights(rng, n, spec: ChaosKernelSpec, noise: NoiseSpec, a):
    kernel, t, order = spec.kernel, spec.t, spec.n
    x0 = np.asarray(spec.x)
    times, lq_t = _dirichlet_times(rng, n, order, t, a)
    pts, lq_x = _chain_points(rng, kernel, times, t, x0)
    logw = _log_chain(kernel, times, pts, t, x0) - lq_t - lq_x
    rho = t ** time_scaling(kernel)[1]
    # second copy: s_sigma(j) = t_j + offset, y_sigma(j) = x_j + offset
    if isinstance(noise.time, WhiteInTime):
        perm = np.tile(np.arange(order), (n, 1))   # only the identity keeps s ordered
        s = times.copy()
    else:
        perm = np.argsort(rng.random((n, order)), axis=1)
        s = np.empty_like(times)
        off = np.empty_like(times)
        for j in range(order):
            o, lw = _sample_time_offset(rng, noise.gamma, t, n)
            off[:, j] = o
            logw += lw
        np.put_along_axis(s, perm, times + off, axis=1)
        logw += math.lgamma(order + 1)             # uniform choice among n! pairings
    y = np.empty_like(pts)
    if isinstance(noise.space, DeltaD1):
        np.put_along_axis(y, perm[:, :, None], pts, axis=1)
    else:
        shifted = np.empty_like(pts)
        for j in range(order):
            w, lw = _sample_space_offset(rng, noise.space, kernel.d, n, rho)
            shifted[:, j] = pts[:, j] + w
            logw += lw
        np.put_along_axis(y, perm[:, :, None], shifted, axis=1)
    logw = logw + _log_chain(kernel, s, y, t, x0)
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.where(np.isfinite(logw), np.exp(np.where(np.isfinite(logw), logw, 0.0)), 0.0)
    return spec.initial_value ** 2 * w


def phi_n(spec: ChaosKernelSpec, noise: NoiseSpec, n_samples: int = 100_000, seed: int = 0,
          threads: int = 1) -> MomentEstimate:
    """Phi_n(t) = n! ||sym f_n||^2, the n-th chaos contribution to E[u(t, x)^2].

    Normalization: covariance constant c_H = 1, noise constants equal to one.
    Times are drawn from Dirichlet gaps with density ~ prod gap^-a, space
    from the kernel chain; the second copy of the variables is paired by a
    uniformly drawn permutation and offset by the covariance proposals.
    """
    _check_noise(spec.kernel, noise)
    if spec.n == 0:
        return MomentEstimate(spec.initial_value ** 2, 0.0, 0, seed, "closed-form")
    if spec.n > MAX_VERTICES // 2:
        raise DimensionCap(f"order {spec.n} exceeds the Monte Carlo cap {MAX_VERTICES // 2}")
    a = gap_exponent(spec.kernel, noise)
    fn = lambda rng, n: _phi_weights(rng, n, spec, noise, a)
    mean, se = _run_blocks(fn, n_samples, seed, ("phi", spec.n), threads)
    return MomentEstimate(mean, se, n_samples, seed, "MC")


def phi_n_white_heat(n: int, t: float, initial_value: float = 1.0) -> float:
    """Closed form (t/4)^(n/2) / Gamma(n/2 + 1) for the 1-d heat kernel and space-time white noise."""
    return initial_value ** 2 * (t / 4.0) ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def second_moment_white_heat(t: float, initial_value: float = 1.0) -> float:
    """sum_n Phi_n = 2 e^{t/4} Phi(sqrt(t/2)), Phi the standard normal CDF."""
    return initial_value ** 2 * math.exp(t / 4.0) * math.erfc(-math.sqrt(t / 4.0))


# truncated p-th moments

def _tuples(p, n_max):
    """Sorted row-order tuples with even total, each with its multiplicity."""
    seen = {}
    for tup in itertools.product(range(n_max + 1), repeat=p):
        if sum(tup) % 2:
            continue
        key = tuple(sorted(tup, reverse=True))
        seen[key] = seen.get(key, 0) + 1
    return sorted(seen.items())


def tail_bound(p: int, t: float, kernel: KernelSpec, noise: NoiseSpec, phis: dict,
               initial_value: float = 1.0, n_terms: int = 200) -> dict:
    """Analytic bound on the chaos terms dropped by truncating every row at N = max(phis).

    Each chaos term obeys ||I_n(f_n)||_p <= (p-1)^{n/2} sqrt(Phi_n) with
    sqrt(Phi_n) ~ C^n t^{n(hbar+2H)/2} / (n!)^{(hbar+1)/2}.  C is the largest
    value implied by the computed Phi_1..Phi_N.  With S the bound on the kept
    part and R that on the dropped part, the truncation error of E[u^p] is at
    most (S + R)^p - S^p.
    """
    if not phis:
        return {"tail_bound": None, "C": None}
    hbar = closed_form_hbar(kernel, noise.lam)
    H = noise.hurst
    e_t = (hbar + 2.0 * H) / 2.0
    e_f = (hbar + 1.0) / 2.0
    N = max(phis)
    consts = []
    for n, ph in phis.items():
        if n >= 1 and ph > 0:
            logc = (0.5 * math.log(ph) + e_f * math.lgamma(n + 1) - n * e_t * math.log(t)) / n
            consts.append(logc)
    if not consts:
        return {"tail_bound": 0.0, "C": 0.0}
    logC = max(consts)
    S = abs(initial_value) + sum((p - 1) ** (n / 2.0) * math.sqrt(max(ph, 0.0))
                                 for n, ph in phis.items() if n >= 1)
    R = 0.0
    for n in range(N + 1, N + 1 + n_terms):
        term = math.exp(n * (logC + e_t * math.log(t) + 0.5 * math.log(max(p - 1, 1e-300)))
                        - e_f * math.lgamma(n + 1))
        R += term
        if term < 1e-17 * max(R, 1e-300):
            break
    return {"tail_bound": (S + R) ** p - S ** p, "C": math.exp(logC)}


def pth_moment_truncated(p: int, spec: ChaosKernelSpec, noise: NoiseSpec, n_max: int,
                         n_samples: int = 100_000, seed: int = 0, threads: int = 1) -> MomentEstimate:
    """E[u(t, x)^p] summed over chaos orders n_j <= n_max, plus a truncation bound.

    The rows are exchangeable, so each multiset of orders is evaluated once
    and weighted by the number of its orderings.  p = 1 gives I_0 exactly:
    a single row has no admissible diagram.
    """
    if p not in (1, 2, 3, 4):
        raise UnsupportedParameter(f"p={p} must be 1, 2, 3 or 4")
    if n_max < 0:
        raise UnsupportedParameter("n_max must be nonnegative")
    if p * n_max > MAX_VERTICES:
        raise DimensionCap(f"p * n_max = {p * n_max} exceeds the vertex cap {MAX_VERTICES}")
    _check_noise(spec.kernel, noise)
    I0 = spec.initial_value
    if p == 1 or n_max == 0:
        extra = {"tail_bound": 0.0 if p == 1 else None, "terms": []}
        return MomentEstimate(I0 ** p, 0.0, 0, seed, "closed-form", extra)
    value, var, used = 0.0, 0.0, 0
    terms = []
    for i, (tup, mult) in enumerate(_tuples(p, n_max)):
        est = sum_F_D(tup, spec, noise, n_samples, seed, threads, ("moment", p, i))
        value += mult * est.value
        var += (mult * est.std_error) ** 2
        used += est.n_samples
        terms.append({"orders": list(tup), "multiplicity": mult, "value": est.value,
                      "std_error": est.std_error})
    # Phi_n for the truncation bound, read off the p = 2 terms when available
    phis = {}
    for n in range(1, n_max + 1):
        if p == 2:
            phis[n] = next(tm["value"] for tm in terms if tm["orders"] == [n, n])
        else:
            phis[n] = sum_F_D((n, n), spec, noise, n_samples, seed, threads, ("phi-bound", n)).value
    tb = tail_bound(p, spec.t, spec.kernel, noise, phis, I0)
    extra = {"tail_bound": tb["tail_bound"], "tail_constant": tb["C"], "terms": terms}
    return MomentEstimate(value, math.sqrt(var), used, seed, "MC", extra)


# lower-bound construction

@dataclass(frozen=True)
class LowerBoundPlan:
    """p rows of m_p = 2m/p time points, the j-th confined to I_j = [t_j - L/4, t_j + L/4]."""

    p: int
    m: int
    eps: float
    t: float

    def __post_init__(self):
        if self.p < 2 or self.p % 2:
            raise ConstraintViolated(f"p={self.p} must be an even integer >= 2")
        if self.m < 1 or (2 * self.m) % self.p:
            raise ConstraintViolated(f"p={self.p} must divide 2m={2 * self.m}")
        if not (0.0 < self.eps <= 1.0 and self.t > 0):
            raise ConstraintViolated("need 0 < eps <= 1 and t > 0")

    @property
    def m_p(self) -> int:
        return 2 * self.m // self.p

    @property
    def L(self) -> float:
        return self.t / (2.0 * (self.m_p + 1))

    def centers(self) -> np.ndarray:
        return np.arange(1, self.m_p + 1) * self.L

    def intervals(self) -> list:
        return [(c - self.L / 4.0, c + self.L / 4.0) for c in self.centers()]

    def gap_window(self) -> tuple:
        """(min, max) distance between points of consecutive intervals."""
        return self.L / 2.0, 1.5 * self.L

    def check(self, b: float) -> None:
        """The points of a row must be at most eps^b apart: m >= p t / (2 eps^b)."""
        need = self.p * self.t / (2.0 * self.eps ** b)
        if self.m < need:
            raise ConstraintViolated(f"m={self.m} < p t / (2 eps^b) = {need:.6g}")
        lo, hi = self.gap_window()
        if not (self.t / (4.0 * (self.m_p + 1)) <= lo + 1e-15 and hi <= self.t / (self.m_p + 1)
                and self.t / (self.m_p + 1) <= self.eps ** b * (1 + 1e-12)):
            raise ConstraintViolated("time-gap window violated")

    def closed_form_integral(self) -> float:
        return (self.L / 2.0) ** (self.m_p * self.p)


def _restricted_weights(rng, n, plan: LowerBoundPlan):
    mp, p, L = plan.m_p, plan.p, plan.L
    c = plan.centers()
    # proposal: uniform on [c_j - L/2, c_j + L/2], twice as wide as I_j
    u = c[None, None, :] + L * (rng.random((n, p, mp)) - 0.5)
    inside = np.all(np.abs(u - c[None, None, :]) <= L / 4.0, axis=(1, 2))
    ordered = (u[:, :, 0] > 0).all(axis=1) & (np.diff(u, axis=2) > 0).all(axis=(1, 2)) \
        & (u[:, :, -1] < plan.t).all(axis=1)
    if np.any(inside & ~ordered):
        raise AssertionError("points in the intervals must be ordered")
    return np.where(inside, L ** (p * mp), 0.0)


def restricted_integral_mc(plan: LowerBoundPlan, n_samples: int = 100_000, seed: int = 0,
                           threads: int = 1) -> MomentEstimate:
    """Monte Carlo value of int prod 1_{I_j}(t^l_j) 1_{simplex} dt over p rows."""
    if plan.p * plan.m_p > MAX_VERTICES:
        raise DimensionCap(f"p m_p = {plan.p * plan.m_p} exceeds {MAX_VERTICES}")
    fn = lambda rng, n: _restricted_weights(rng, n, plan)
    mean, se = _run_blocks(fn, n_samples, seed, ("restricted", plan.p, plan.m), threads)
    return MomentEstimate(mean, se, n_samples, seed, "MC",
                          {"closed_form": plan.closed_form_integral()})


@dataclass
class LowerBound:
    log_value: float
    m0: float
    eps_tp: float
    t_exponent: Fraction
    p_exponent: Fraction

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 700 else math.inf


def log_lower_bound_summand(m: float, eps: float, t: float, p: float, a: float, lam: float,
                            gamma: float) -> float:
    """log of m! eps^{-m lambda} t^{-m gamma} (t p / m)^{2m(a+1)}."""
    return (math.lgamma(m + 1.0) - m * lam * math.log(eps) - m * gamma * math.log(t)
            + 2.0 * m * (a + 1.0) * math.log(t * p / m))


def log_stirling_form(m: float, eps: float, t: float, p: float, a: float, lam: float,
                      gamma: float) -> float:
    """m log(eps^-lambda t^{2(a+1)-gamma} p^{2(a+1)} / m^{2a+1}), the Stirling-reduced summand."""
    return m * (-lam * math.log(eps) + (2 * (a + 1) - gamma) * math.log(t)
                + 2 * (a + 1) * math.log(p) - (2 * a + 1) * math.log(m))


def optimal_m(eps: float, t: float, p: float, a: float, lam: float, gamma: float,
              C: float = math.exp(-1.0)) -> float:
    """m_0(eps) = (C eps^-lambda t^{2(a+1)-gamma} p^{2(a+1)})^{1/(2a+1)}.

    With C = 1/e the Stirling form at m_0 equals m_0 itself.
    """
    return (C * eps ** -lam * t ** (2 * (a + 1) - gamma) * p ** (2 * (a + 1))) ** (1.0 / (2 * a + 1))


def optimal_eps(t: float, p: float, a: float, b: float, lam: float, gamma: float) -> float:
    """eps_{t,p} = t^{-(1-gamma)/D} p^{-1/D},  D = b(2a+1) - lambda."""
    D = b * (2 * a + 1) - lam
    return t ** (-(1 - gamma) / D) * p ** (-1.0 / D)


def optimized_exponents(a, b, lam, gamma):
    """Exponents of t and p in log(bound) at eps = eps_{t,p}, m = m_0(eps), in exact arithmetic.

    Composes the exponents of m_0 (eps: -lambda/(2a+1), t: 1 + (1-gamma)/(2a+1),
    p: 1 + 1/(2a+1)) with those of eps_{t,p} (t: -(1-gamma)/D, p: -1/D).
    """
    a, b, lam, gamma = map(ex.as_fraction, (a, b, lam, gamma))
    ex.check_g2(a, b, lam)
    D = b * (2 * a + 1) - lam
    m_eps = -lam / (2 * a + 1)
    m_t = 1 + (1 - gamma) / (2 * a + 1)
    m_p = 1 + Fraction(1) / (2 * a + 1)
    e_t = -(1 - gamma) / D
    e_p = Fraction(-1) / D
    return m_t + m_eps * e_t, m_p + m_eps * e_p


def lower_bound_value(plan: LowerBoundPlan, a: float, b: float, lam: float, gamma: float) -> LowerBound:
    """Closed-form lower-bound summand for the plan, with the optimizer of its asymptotics.

    Constants are set to one.  Raises :class:`ConstraintViolated` when the
    plan's points may be more than eps^b apart or when b(2a+1) <= lambda.
    """
    ex.check_g2(a, b, lam)
    plan.check(b)
    logv = log_lower_bound_summand(plan.m, plan.eps, plan.t, plan.p, a, lam, gamma)
    eps_tp = optimal_eps(plan.t, plan.p, a, b, lam, gamma)
    m0 = optimal_m(eps_tp, plan.t, plan.p, a, lam, gamma)
    te, pe = optimized_exponents(a, b, lam, gamma)
    return LowerBound(logv, m0, eps_tp, te, pe)


# finite-difference oracle

@dataclass
class FdResult:
    moments: dict          # k -> MomentEstimate of E[u^k]
    samples: np.ndarray
    dx: float
    dt: float
    L_dom: float
    n_steps: int

    def to_json(self) -> dict:
        return {"schema_version": 1, "dx": self.dx, "dt": self.dt, "L_dom": self.L_dom,
                "n_steps": self.n_steps,
                "moments": {str(k): v.to_json() for k, v in self.moments.items()}}


def _fd_grid(t, dx, dt, L_dom):
    if dt is None:
        dt = dx * dx / 2.0
    if L_dom is None:
        L_dom = max(2.0, 4.0 * math.sqrt(t))
    if dt > dx * dx / 2.0 * (1 + 1e-12):
        raise UnstableDiscretization(f"dt={dt} exceeds dx^2/2={dx * dx / 2}")
    if L_dom < 4.0 * math.sqrt(t) * (1 - 1e-12):
        raise UnstableDiscretization(f"domain half-width {L_dom} < 4 sqrt(t)")
    n_sites = int(round(2.0 * L_dom / dx))
    n_steps = int(round(t / dt))
    if n_steps < 1 or abs(n_steps * dt - t) > 1e-9 * t:
        raise UnstableDiscretization(f"t={t} is not a multiple of dt={dt}")
    return dt, L_dom, n_sites, n_steps


def fd_oracle_she(t: float, dx: float = 1.0 / 128, dt: float | None = None, n_paths: int = 10_000,
                  seed: int = 0, L_dom: float | None = None, noise_amplitude: float = 1.0,
                  max_moment: int = 4, threads: int = 1, block: int = 64) -> FdResult:
    """Sample moments of u(t, 0) for  du = (1/2) u'' dt + u dW  by semi-implicit Euler.

    Space-time white noise is discretized by independent Rademacher cell
    increments of variance dt dx; the scheme keeps E[u] = 1 exactly.
    """
    from ._fdkernel import cyclic_setup, run_paths

    dt, L_dom, n_sites, n_steps = _fd_grid(t, dx, dt, L_dom)
    r = dt / (2.0 * dx * dx)
    sigma = noise_amplitude * math.sqrt(dt / dx)
    cp, denom, z, vfac = cyclic_setup(n_sites, r)
    keys = np.random.SeedSequence(int(seed)).generate_state(n_paths, dtype=np.uint64)
    probe = n_sites // 2
    chunks = [keys[i:i + block] for i in range(0, n_paths, block)]
    run = lambda k: run_paths(k, n_sites, n_steps, r, sigma, cp, denom, z, vfac, probe)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(k) for k in chunks]
    u = np.concatenate(parts)
    moments = {}
    for k in range(1, max_moment + 1):
        v = u ** k
        se = float(v.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
        moments[k] = MomentEstimate(float(v.mean()), se, n_paths, seed, "MC")
    return FdResult(moments, u, dx, dt, L_dom, n_steps)


def fd_exact_second_moment(t: float, dx: float = 1.0 / 128, dt: float | None = None,
                           L_dom: float | None = None, noise_amplitude: float = 1.0) -> float:
    """E[u(t, 0)^2] of the discrete scheme itself, without sampling.

    By translation invariance E[u_i u_j] = m(i - j); one step maps the
    discrete Fourier transform of m to |b(k)|^2 (m^(k) + sigma^2 m(0)),
    b(k) the symbol of the implicit solve.
    """
    dt, L_dom, n_sites, n_steps = _fd_grid(t, dx, dt, L_dom)
    r = dt / (2.0 * dx * dx)
    s2 = noise_amplitude ** 2 * dt / dx
    k = np.arange(n_sites)
    b2 = 1.0 / ((1.0 + 2.0 * r) - 2.0 * r * np.cos(2.0 * math.pi * k / n_sites)) ** 2
    mh = np.zeros(n_sites)
    mh[0] = n_sites
    for _ in range(n_steps):
        m0 = mh.sum() / n_sites
        mh = b2 * (mh + s2 * m0)
    return float(mh.sum() / n_sites)
