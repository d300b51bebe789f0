"""Exception types shared across the package."""


class LisdistError(Exception):
    """Base class for package errors."""


class SizeLimitError(LisdistError, ValueError):
    """Input exceeds a configured desk-scale size guard."""


class PrecisionError(LisdistError, ArithmeticError):
    """A computation lost all significant digits at the working precision."""


class ReconstructionError(LisdistError, ArithmeticError):
    """Rational reconstruction from a floating value failed validation."""


class ConvergenceError(LisdistError, ArithmeticError):
    """An iteration or quadrature refinement failed to converge.

    Carries enough state (`detail`) to diagnose: last iterates, bracket,
    node counts.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail or {}


class OutsideFitIntervalError(LisdistError, ValueError):
    """A fitted approximation was evaluated outside its fit interval."""
