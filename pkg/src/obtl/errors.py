"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`ObtlError`
and carries a ``category`` used by the command-line front end to pick an
exit code.
"""


class ObtlError(Exception):
    category = "internal"


class ConfigError(ObtlError, ValueError):
    category = "config"


class DataError(ObtlError, ValueError):
    category = "data"


class NumericError(ObtlError, ArithmeticError):
    category = "numeric"


class DomainError(NumericError, ValueError):
    """A parameter lies outside the domain of a function."""


class FactorizationError(NumericError):
    """A matrix that must be positive definite failed its Cholesky factorization."""


class SeriesConvergenceError(NumericError):
    """A hypergeometric series was asked to sum outside its region of convergence."""


class SaddlePointError(NumericError):
    """The Laplace saddle point is complex or outside the admissible region."""


class CurvatureError(NumericError):
    """The Laplace Hessian determinant is not positive."""


class TruncationWarning(RuntimeWarning):
    """A truncated series hit its degree cap before meeting its tolerance."""
