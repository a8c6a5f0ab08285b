"""Exception hierarchy shared by all modules."""


class WentBetaError(Exception):
    """Base class for library errors."""


class DomainError(WentBetaError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(WentBetaError, ArithmeticError):
    """A series, optimizer or quadrature failed to reach its tolerance."""


class DegenerateInformationError(WentBetaError, ArithmeticError):
    """Fisher information (or its matrix) is not positive definite."""


class UnsupportedCombinationError(WentBetaError, ValueError):
    """No asymptotic expression is available for the requested inputs."""
