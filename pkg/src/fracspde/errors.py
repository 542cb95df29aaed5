"""Exception hierarchy shared by all modules."""


class FracSPDEError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FracSPDEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(FracSPDEError, ArithmeticError):
    """A numerical method could not reach the requested accuracy.

    ``magnitude`` carries the size of the last series increment or the
    estimated error, when one is available.
    """

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class DivergenceError(FracSPDEError, ArithmeticError):
    """A simulated field left the representable range."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UnsupportedDistributionError(FracSPDEError, ValueError):
    """Pointwise evaluation was requested for a distribution (e.g. a Dirac pair)."""
