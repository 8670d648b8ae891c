"""Exception hierarchy shared by all modules."""


class ChainError(Exception):
    """Base class for every error raised by :mod:`openchain`."""


class InvalidArgumentError(ChainError, ValueError):
    """A parameter lies outside the domain of an operation."""


class ConfigError(InvalidArgumentError):
    """A scenario configuration is malformed or inconsistent."""


class InvalidStateError(ChainError, ValueError):
    """A covariance matrix or displacement vector violates the Gaussian structure."""


class NumericalError(ChainError, ArithmeticError):
    """A numerical procedure failed or would return an untrustworthy result."""


class NumericalSingularityError(NumericalError):
    """A matrix that must be inverted is singular to working precision."""


class SingularityError(NumericalError):
    """An integrand pole sits on the boundary of the integration range."""


class NonUniqueSteadyStateError(NumericalError):
    """The drift matrix is not Hurwitz, so no unique steady state exists."""


class IllConditionedError(NumericalError):
    """A linear system is too ill-conditioned to solve reliably."""


class TruncationError(NumericalError):
    """A Fock-space truncation discards more weight than allowed."""
