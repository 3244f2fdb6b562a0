"""Exception hierarchy for floqsim.

Every error raised by the library derives from FloqsimError. The CLI maps
configuration-class errors to exit code 2 and numerical/convergence-class
errors to exit code 3.
"""


class FloqsimError(Exception):
    """Base class for all floqsim errors."""


# -- configuration / input errors (CLI exit code 2) --------------------------

class ConfigError(FloqsimError):
    """Invalid experiment configuration; message names the offending field."""


class EmptySectorError(FloqsimError):
    """Requested symmetry sector contains no configurations."""


class SizeLimitError(FloqsimError):
    """Requested object would exceed the hard size guard."""


class NotInSectorError(FloqsimError):
    """Configuration does not belong to the basis sector."""


class BasisMismatchError(FloqsimError):
    """States or operators defined over different bases were combined."""


class CutOutOfRangeError(FloqsimError):
    """Entropy bipartition cut outside 1..L-1."""


class NonDiagonalStaticError(FloqsimError):
    """Rotating-frame construction needs a diagonal static part."""


# -- numerical / convergence errors (CLI exit code 3) ------------------------

class NotConvergedError(FloqsimError):
    """Step-doubling convergence test failed at the step cap."""


class QuadratureNotConvergedError(FloqsimError):
    """Quadrature refinement did not reach the requested tolerance."""


class PeriodicityViolationError(FloqsimError):
    """Integrand is not periodic over the averaging window."""


class KrylovBreakdownError(FloqsimError):
    """Krylov exponential failed to reach tolerance.

    Carries the last residual estimate in .residual.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


CONFIG_ERRORS = (
    ConfigError,
    EmptySectorError,
    SizeLimitError,
    NotInSectorError,
    BasisMismatchError,
    CutOutOfRangeError,
    NonDiagonalStaticError,
)

NUMERICAL_ERRORS = (
    NotConvergedError,
    QuadratureNotConvergedError,
    PeriodicityViolationError,
    KrylovBreakdownError,
)
