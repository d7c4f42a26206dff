"""Exception hierarchy shared by all modules."""


class GlcError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(GlcError, ValueError):
    """An input violates an operation's preconditions."""


class PoleError(GlcError, ArithmeticError):
    """A special function was evaluated at one of its poles."""


class DomainError(GlcError, ArithmeticError):
    """An argument lies outside the supported domain of a function."""


class DivergenceError(GlcError, ArithmeticError):
    """An integral or moment does not exist (e.g. singular path loss with alpha >= d)."""


class DegenerateCovarianceError(GlcError, ArithmeticError):
    """A covariance matrix is singular where a density is required."""


class SeriesDivergenceError(GlcError, ArithmeticError):
    """The series form failed to converge; fall back to quadrature."""


class FallbackNeededError(GlcError, ArithmeticError):
    """A closed form is not applicable for these parameters; use quadrature."""


class ParameterDegeneracyError(FallbackNeededError):
    """A closed form has a removable degeneracy at these parameters."""


class UnsupportedBranchError(FallbackNeededError):
    """No closed form is implemented for this (eps, alpha, d) combination."""


class UnsupportedDimensionError(GlcError, ValueError):
    """The requested dimension is not supported by this evaluation path."""


class MgfDomainError(GlcError, ArithmeticError):
    """The MGF argument lies outside the region where the MGF exists."""


class HomogeneityError(GlcError, ValueError):
    """Interferer mobilities are not homogeneous but the operation requires it."""


class ScenarioValidationError(GlcError, ValueError):
    """A scenario file failed to parse or validate."""
