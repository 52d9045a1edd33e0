"""Exception types shared by all modules.

Every error carries an ``exit_code`` used by the command line front end:
1 for a failed verification, 2 for bad input, 3 for a numerical failure.
"""


class IntermittencyError(Exception):
    exit_code = 2


class UsageError(IntermittencyError, ValueError):
    exit_code = 2


class VerificationFailure(IntermittencyError):
    exit_code = 1


class NumericalError(IntermittencyError, ArithmeticError):
    exit_code = 3


# bad input
class EvalOfDelta(UsageError):
    """A delta covariance has no pointwise value."""


class SingularPoint(UsageError):
    """Evaluation at the singular point of a power law."""


class NonpositiveTime(UsageError):
    pass


class UnsupportedParameter(UsageError):
    pass


class ParameterOutOfPositivityRange(UsageError):
    """Fractional diffusion parameters outside the ranges with a positive kernel."""


class OddVertexCount(UsageError):
    pass


class CapExceeded(UsageError):
    pass


class DimensionCap(UsageError):
    pass


class MeasureKernelNoDensity(UsageError):
    """The three dimensional wave kernel is a surface measure."""


class SingularityNotIntegrable(UsageError):
    pass


class ConstraintViolated(UsageError):
    pass


class RadiusOutOfRange(UsageError):
    pass


class InsufficientGrid(UsageError):
    pass


class UnstableDiscretization(UsageError):
    pass


class NoSpectralDensity(UsageError):
    pass


# numerical failures
class QuadratureNonConvergence(NumericalError):
    pass


class SeriesAsymptoticMismatch(NumericalError):
    """Series and asymptotic evaluations disagree on their overlap band."""


# verification outcomes
class SlopeMismatch(VerificationFailure):
    pass
