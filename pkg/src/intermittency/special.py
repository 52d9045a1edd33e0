"""Mittag-Leffler and Wright functions, and the neutral-fractional density.

Scalar evaluation of the two entire functions sums their power series in
multiprecision arithmetic, with a working precision chosen from the size of
the largest term so that cancellation for negative arguments is harmless.
For large negative arguments the Mittag-Leffler function switches to its
asymptotic expansion.  The switch point is validated once per parameter
pair: both methods must agree on an overlap band.

:class:`MittagLefflerTable` tabulates s -> E_{b,b'}(-s) on s >= 0 with
piecewise Chebyshev interpolants for fast vectorized use inside quadrature.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import SeriesAsymptoticMismatch, UnsupportedParameter

_GUARD_DIGITS = 20
OVERLAP_RTOL = 1e-7


def _log_rgamma(x: float) -> float:
    """log |1/Gamma(x)|, -inf at the poles."""
    if x <= 0 and x == math.floor(x):
        return -math.inf
    return -math.lgamma(x)


def _series_mp(weight, log_weight, z: float, max_terms: int = 100000) -> float:
    """Sum  sum_k z^k * weight(k)  with a precision adapted to the largest term.

    ``weight(k)`` is the mpmath coefficient and ``log_weight(k)`` its log
    magnitude in double precision, used to locate the largest term and the
    truncation point before the multiprecision pass.
    """
    if z == 0.0:
        with mpmath.workdps(30):
            return float(weight(0))
    logz = math.log(abs(z))
    peak = -math.inf
    k = 0
    while k < max_terms:
        lt = k * logz + log_weight(k)
        peak = max(peak, lt)
        # a cancelling sum is at least about exp(-peak); stop well below that
        # (a zero coefficient at a pole of Gamma says nothing about the tail)
        if k > 5 and -math.inf < lt < -max(peak, 0.0) - 60.0 and lt < peak - 60.0:
            break
        k += 1
    dps = _GUARD_DIGITS + int(2.0 * max(peak, 0.0) / math.log(10.0)) + 1
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        total = mpmath.mpf(0)
        p = mpmath.mpf(1)
        for j in range(k + 1):
            total += p * weight(j)
            p *= zz
        return float(total)


def _ml_series(beta: float, beta2: float, z: float) -> float:
    b, b2 = mpmath.mpf(beta), mpmath.mpf(beta2)
    return _series_mp(lambda k: mpmath.rgamma(b * k + b2),
                      lambda k: _log_rgamma(beta * k + beta2), z)


def _ml_asymptotic(beta: float, beta2: float, s):
    """E_{beta,beta2}(-s) for large s > 0 (vectorized).

    Algebraic part  -sum_k (-s)^-k / Gamma(beta2 - beta k), truncated at the
    smallest term, plus for beta > 1 the exponentially damped oscillation
    coming from the two poles z^(1/beta) off the negative axis.
    """
    s = np.asarray(s, dtype=float)
    # optimal truncation: the envelope Gamma(beta k)/s^k is smallest near beta k = s^(1/beta)
    k_stop = np.clip(np.floor(s ** (1.0 / beta) / beta), 1, 200)
    log_s = np.log(s)
    total = np.zeros_like(s)
    prev_small = False
    for k in range(1, int(k_stop.max()) + 1):
        x = beta2 - beta * k
        # -(-s)^-k / Gamma(x), in logs to avoid overflow of Gamma(1 - x)
        if x <= 0 and x == math.floor(x):
            continue  # 1/Gamma vanishes at the pole
        mag = np.exp(-gammaln(x) - k * log_s)
        live = k <= k_stop
        total = total + np.where(live, (-1.0) ** (k + 1) * gammasgn(x) * mag, 0.0)
        small = ~np.any(live & (mag > 1e-18 * np.abs(total)))
        # a single tiny term can sit next to a pole of 1/Gamma; require two in a row
        if k > 2 and small and prev_small:
            break
        prev_small = small
    if beta > 1.0:
        w = s ** (1.0 / beta) * np.exp(1j * math.pi / beta)
        total = total + (2.0 / beta) * np.real(w ** (1.0 - beta2) * np.exp(w))
    return total


@lru_cache(maxsize=None)
def ml_switch(beta: float, beta2: float) -> float:
    """Validated switch point s* for E_{beta,beta2}(-s); inf when no asymptotic path is used."""
    if beta == 1.0:
        # the pole sits on the branch cut; the series is used everywhere
        return math.inf
    s_switch = max(8.0, 30.0 ** beta)
    band = s_switch * np.linspace(1.0, 1.25, 5)
    asym = _ml_asymptotic(beta, beta2, band)
    for s, a in zip(band, asym):
        ser = _ml_series(beta, beta2, -float(s))
        scale = max(abs(ser), abs(a), s ** -2)
        if abs(ser - a) > OVERLAP_RTOL * scale:
            raise SeriesAsymptoticMismatch(
                f"Mittag-Leffler E_{{{beta},{beta2}}}: series {ser!r} and asymptotic {a!r} "
                f"disagree at z={-s}")
    return s_switch


def _check_ml(beta, beta2):
    if not 0.0 < beta < 2.0:
        raise UnsupportedParameter(f"Mittag-Leffler beta={beta} must lie in (0,2)")
    if beta2 <= 0.0:
        raise UnsupportedParameter(f"Mittag-Leffler second parameter {beta2} must be positive")


def mittag_leffler(beta: float, beta2: float, z):
    """E_{beta,beta2}(z) = sum_k z^k / Gamma(beta k + beta2) for real z.

    Accepts a scalar or an array of real arguments.
    """
    beta, beta2 = float(beta), float(beta2)
    _check_ml(beta, beta2)
    z_arr = np.asarray(z, dtype=float)
    out = np.empty(z_arr.shape)
    flat_in, flat_out = z_arr.ravel(), out.ravel()
    s_switch = ml_switch(beta, beta2) if np.any(flat_in < -8.0) else math.inf
    for i, zi in enumerate(flat_in):
        if zi <= -s_switch:
            flat_out[i] = float(_ml_asymptotic(beta, beta2, -zi))
        else:
            flat_out[i] = _ml_series(beta, beta2, float(zi))
    out = flat_out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


class MittagLefflerTable:
    """Fast vectorized s -> E_{beta,beta2}(-s) for s >= 0.

    Chebyshev interpolants of degree ``degree`` on unit cells up to s=8,
    then on cells growing geometrically up to the validated switch point;
    the asymptotic expansion beyond.  For beta = beta2 = 1 this is exp(-s).
    """

    def __init__(self, beta: float, beta2: float, degree: int = 24, ratio: float = 1.2):
        _check_ml(beta, beta2)
        self.beta, self.beta2 = float(beta), float(beta2)
        self._exp = self.beta == 1.0 and self.beta2 == 1.0
        if self._exp:
            return
        s_max = ml_switch(self.beta, self.beta2)
        if not math.isfinite(s_max):
            # beta = 1 with another second parameter: tabulate far enough out
            s_max = 60.0
        edges = [0.0]
        while edges[-1] < s_max:
            e = edges[-1]
            edges.append(min(s_max, e + 1.0 if e < 8.0 else e * ratio))
        self.edges = np.array(edges)
        self.s_max = s_max
        nodes = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
        coefs = np.empty((len(edges) - 1, degree + 1))
        for j in range(len(edges) - 1):
            lo, hi = edges[j], edges[j + 1]
            s = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            vals = [_ml_series(self.beta, self.beta2, -float(v)) for v in s]
            coefs[j] = np.polynomial.chebyshev.chebfit(nodes, vals, degree)
        self.coefs = coefs

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self._exp:
            return np.exp(-s)
        out = np.empty(s.shape)
        inside = s < self.s_max
        if np.any(~inside):
            if math.isfinite(ml_switch(self.beta, self.beta2)):
                out[~inside] = _ml_asymptotic(self.beta, self.beta2, s[~inside])
            else:
                out[~inside] = [_ml_series(self.beta, self.beta2, -float(v)) for v in s[~inside]]
        if np.any(inside):
            si = s[inside]
            idx = np.clip(np.searchsorted(self.edges, si, side="right") - 1, 0, len(self.edges) - 2)
            lo, hi = self.edges[idx], self.edges[idx + 1]
            x = (2.0 * si - lo - hi) / (hi - lo)
            c = self.coefs[idx]
            # Clenshaw recurrence, vectorized over points
            b1 = np.zeros_like(x)
            b2 = np.zeros_like(x)
            for k in range(c.shape[1] - 1, 0, -1):
                b1, b2 = 2.0 * x * b1 - b2 + c[:, k], b1
            out[inside] = x * b1 - b2 + c[:, 0]
        return out


@lru_cache(maxsize=16)
def ml_table(beta: float, beta2: float) -> MittagLefflerTable:
    return MittagLefflerTable(beta, beta2)


def wright(a: float, b: float, z: float) -> float:
    """Wright function phi(a,b;z) = sum_k z^k / (k! Gamma(a k + b)), a > -1."""
    a, b, z = float(a), float(b), float(z)
    if a <= -1.0:
        raise UnsupportedParameter(f"Wright function needs a > -1, got {a}")
    ma, mb = mpmath.mpf(a), mpmath.mpf(b)
    return _series_mp(lambda k: mpmath.rgamma(k + 1) * mpmath.rgamma(ma * k + mb),
                      lambda k: _log_rgamma(k + 1.0) + _log_rgamma(a * k + b), z)


def neutral_fractional_density(alpha: float, x):
    """Closed-form neutral-fractional density N_alpha^0(|x|) on the line."""
    if not 0.0 < alpha <= 2.0:
        raise UnsupportedParameter(f"alpha={alpha} must lie in (0,2]")
    r = np.abs(np.asarray(x, dtype=float))
    ra = r ** alpha
    num = r ** (alpha - 1.0) * math.sin(alpha * math.pi / 2.0)
    out = num / (1.0 + 2.0 * ra * math.cos(alpha * math.pi / 2.0) + ra * ra) / math.pi
    return float(out) if out.ndim == 0 else out
