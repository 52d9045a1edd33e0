"""Covariance structure of the driving Gaussian noise.

The noise is white or power-law correlated in time, and Riesz, product
(Riemann-Liouville) or delta correlated in space.  Only the canonical
pure power laws are evaluated, with both sandwich constants equal to one;
the constants ``lower_c`` and ``upper_C`` are carried as metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalOfDelta, SingularPoint, UnsupportedParameter


@dataclass(frozen=True)
class PowerLaw:
    """Time covariance |s|^-gamma with 0 < gamma < 1."""

    gamma: float
    lower_c: float = 1.0
    upper_C: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise UnsupportedParameter(f"time exponent gamma={self.gamma} must lie in (0,1)")
        if not 0.0 < self.lower_c <= self.upper_C:
            raise UnsupportedParameter("need 0 < lower_c <= upper_C")

    @property
    def hurst(self) -> float:
        return 1.0 - self.gamma / 2.0


@dataclass(frozen=True)
class WhiteInTime:
    """Delta correlation in time, the gamma = 1 endpoint."""

    @property
    def gamma(self) -> float:
        return 1.0

    @property
    def hurst(self) -> float:
        return 0.5


@dataclass(frozen=True)
class Riesz:
    lam: float
    d: int = 1

    def __post_init__(self):
        _check_dim(self.d)
        if not 0.0 < self.lam < self.d:
            raise UnsupportedParameter(f"Riesz exponent lambda={self.lam} must lie in (0,{self.d})")


@dataclass(frozen=True)
class ProductRL:
    lambdas: tuple

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if not self.lambdas:
            raise UnsupportedParameter("product covariance needs at least one exponent")
        for v in self.lambdas:
            if not 0.0 < v < 1.0:
                raise UnsupportedParameter(f"product exponent {v} must lie in (0,1)")

    @property
    def d(self) -> int:
        return len(self.lambdas)


@dataclass(frozen=True)
class DeltaD1:
    """Spatial white noise on the line."""

    @property
    def d(self) -> int:
        return 1


@dataclass(frozen=True)
class RieszHat:
    """Noise given through its spectral density |xi|^(lambda-d)."""

    lam: float
    d: int = 1

    def __post_init__(self):
        _check_dim(self.d)
        if not 0.0 < self.lam < self.d:
            raise UnsupportedParameter(f"spectral exponent lambda={self.lam} must lie in (0,{self.d})")


@dataclass(frozen=True)
class ProductHat:
    lambdas: tuple

    def __post_init__(self):
        ProductRL.__post_init__(self)

    @property
    def d(self) -> int:
        return len(self.lambdas)


TimeCovariance = Union[PowerLaw, WhiteInTime]
SpaceCovariance = Union[Riesz, ProductRL, DeltaD1, RieszHat, ProductHat]


@dataclass(frozen=True)
class NoiseSpec:
    time: TimeCovariance
    space: SpaceCovariance

    def __post_init__(self):
        if isinstance(self.space, DeltaD1) and not isinstance(self.time, WhiteInTime):
            raise UnsupportedParameter("spatial white noise is only supported with white time")

    @property
    def d(self) -> int:
        return self.space.d

    @property
    def lam(self) -> float:
        return total_lambda(self.space)

    @property
    def gamma(self) -> float:
        return self.time.gamma

    @property
    def hurst(self) -> float:
        return self.time.hurst

    def to_json(self) -> dict:
        return noise_to_json(self)


def _check_dim(d):
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise UnsupportedParameter(f"dimension must be a positive integer, got {d!r}")


def white_white() -> NoiseSpec:
    """Space-time white noise on the line."""
    return NoiseSpec(WhiteInTime(), DeltaD1())


def as_points(x, d: int) -> np.ndarray:
    """Coerce ``x`` to an array of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        if x.ndim == 0 or x.shape[-1] != 1:
            x = x[..., None]
        return x
    if x.shape[-1] != d:
        raise UnsupportedParameter(f"expected points in R^{d}, got shape {x.shape}")
    return x


def eval_gamma(tc: TimeCovariance, s):
    """Canonical time covariance |s|^-gamma."""
    if isinstance(tc, WhiteInTime):
        raise EvalOfDelta("white-in-time covariance has no pointwise value")
    s = np.abs(np.asarray(s, dtype=float))
    if np.any(s == 0):
        raise SingularPoint("time covariance is singular at 0")
    out = s ** (-tc.gamma)
    return float(out) if out.ndim == 0 else out


def eval_lambda(sc: SpaceCovariance, x):
    """Canonical spatial covariance |x|^-lambda or prod |x_j|^-lambda_j."""
    if isinstance(sc, DeltaD1):
        raise EvalOfDelta("spatial white noise has no pointwise value")
    pts = as_points(x, sc.d)
    if isinstance(sc, (Riesz, RieszHat)):
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if np.any(r == 0):
            raise SingularPoint("Riesz covariance is singular at the origin")
        out = r ** (-sc.lam)
    else:
        ax = np.abs(pts)
        if np.any(ax == 0):
            raise SingularPoint("product covariance is singular on the coordinate hyperplanes")
        out = np.prod(ax ** (-np.asarray(sc.lambdas)), axis=-1)
    return float(out) if out.ndim == 0 else out


def spectral_density(sc: SpaceCovariance, xi, normalized: bool = False):
    """Spectral density |xi|^(lambda-d) or prod |xi_j|^(lambda_j-1).

    With ``normalized=True`` the value is multiplied by
    :func:`fourier_constant`, giving the exact Fourier transform of the
    canonical spatial covariance.
    """
    if isinstance(sc, DeltaD1):
        out = np.ones(as_points(xi, 1).shape[:-1])
        return float(out) if out.ndim == 0 else out
    pts = as_points(xi, sc.d)
    if isinstance(sc, (Riesz, RieszHat)):
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if np.any(r == 0):
            raise SingularPoint("spectral density is singular at 0")
        out = r ** (sc.lam - sc.d)
    else:
        ax = np.abs(pts)
        if np.any(ax == 0):
            raise SingularPoint("spectral density is singular on the coordinate hyperplanes")
        out = np.prod(ax ** (np.asarray(sc.lambdas) - 1.0), axis=-1)
    if normalized:
        out = out * fourier_constant(sc)
    return float(out) if out.ndim == 0 else out


def riesz_fourier_constant(lam: float, d: int) -> float:
    """c with  int e^{-i xi.x} |x|^-lam dx = c |xi|^(lam-d)  on R^d."""
    return math.pi ** (d / 2) * 2.0 ** (d - lam) * math.gamma((d - lam) / 2) / math.gamma(lam / 2)


def fourier_constant(sc: SpaceCovariance) -> float:
    if isinstance(sc, DeltaD1):
        return 1.0
    if isinstance(sc, (Riesz, RieszHat)):
        return riesz_fourier_constant(sc.lam, sc.d)
    return math.prod(riesz_fourier_constant(v, 1) for v in sc.lambdas)


def total_lambda(sc: SpaceCovariance) -> float:
    if isinstance(sc, DeltaD1):
        return 1.0
    if isinstance(sc, (Riesz, RieszHat)):
        return float(sc.lam)
    return float(sum(sc.lambdas))


# JSON round trip

def noise_to_json(spec: NoiseSpec) -> dict:
    tc, sc = spec.time, spec.space
    if isinstance(tc, WhiteInTime):
        time = {"kind": "white"}
    else:
        time = {"kind": "power", "gamma": tc.gamma}
        if (tc.lower_c, tc.upper_C) != (1.0, 1.0):
            time.update(lower_c=tc.lower_c, upper_C=tc.upper_C)
    if isinstance(sc, Riesz):
        space = {"kind": "riesz", "lambda": sc.lam, "d": sc.d}
    elif isinstance(sc, ProductRL):
        space = {"kind": "product", "lambdas": list(sc.lambdas)}
    elif isinstance(sc, DeltaD1):
        space = {"kind": "delta"}
    elif isinstance(sc, RieszHat):
        space = {"kind": "riesz_hat", "lambda": sc.lam, "d": sc.d}
    else:
        space = {"kind": "product_hat", "lambdas": list(sc.lambdas)}
    return {"time": time, "space": space}


def noise_from_json(obj: dict) -> NoiseSpec:
    try:
        t, s = obj["time"], obj["space"]
        if t["kind"] == "white":
            time = WhiteInTime()
        elif t["kind"] == "power":
            time = PowerLaw(float(t["gamma"]), float(t.get("lower_c", 1.0)), float(t.get("upper_C", 1.0)))
        else:
            raise UnsupportedParameter(f"unknown time covariance kind {t['kind']!r}")
        kind = s["kind"]
        if kind == "riesz":
            space = Riesz(float(s["lambda"]), int(s.get("d", 1)))
        elif kind == "product":
            space = ProductRL(tuple(s["lambdas"]))
        elif kind == "delta":
            space = DeltaD1()
        elif kind == "riesz_hat":
            space = RieszHat(float(s["lambda"]), int(s.get("d", 1)))
        elif kind == "product_hat":
            space = ProductHat(tuple(s["lambdas"]))
        else:
            raise UnsupportedParameter(f"unknown space covariance kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise UnsupportedParameter(f"malformed noise specification: {exc}") from exc
    return NoiseSpec(time, space)
