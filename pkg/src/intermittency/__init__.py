"""Numerical companion for intermittency of SPDEs with Gaussian noise.

Modules: ``noise`` (covariances), ``kernels`` (Green's functions and ball
masses), ``diagrams`` (admissible Feynman diagrams), ``moments`` (chaos
integrals and Monte Carlo moments), ``smallball``, ``hls`` and
``exponents``.  The ``intermittency`` command wraps them.
"""

from .errors import IntermittencyError, NumericalError, UsageError, VerificationFailure
from .exponents import lower_exponents, matched_hbar, table, upper_exponents
from .kernels import AlphaHeat, BallMassQuery, FracDiff, Heat, Wave, ball_mass, kernel_density
from .noise import DeltaD1, NoiseSpec, PowerLaw, ProductRL, Riesz, WhiteInTime, white_white

__version__ = "0.1.0"

__all__ = [
    "AlphaHeat", "BallMassQuery", "DeltaD1", "FracDiff", "Heat", "IntermittencyError",
    "NoiseSpec", "NumericalError", "PowerLaw", "ProductRL", "Riesz", "UsageError",
    "VerificationFailure", "Wave", "WhiteInTime", "ball_mass", "kernel_density",
    "lower_exponents", "matched_hbar", "table", "upper_exponents", "white_white",
]
