"""Exception types shared across the toolkit."""


class ViscarlError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ViscarlError, ValueError):
    """A parameter or state is outside the valid domain."""


class ConvergenceError(ViscarlError, RuntimeError):
    """An iterative solver failed to converge; carries the final residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RegimeError(ViscarlError, ValueError):
    """Requested asymptotic regime (good/bad cavity) is violated by the parameters."""


class NumericalSingularityError(ViscarlError, ArithmeticError):
    """A denominator vanished during a recursion or iteration."""


class UndefinedPhaseError(ViscarlError, ValueError):
    """Field magnitude too small to define a phase on the requested window."""


class IntegrationError(ViscarlError, RuntimeError):
    """Time integration produced NaN/overflow or violated a stability guard."""
