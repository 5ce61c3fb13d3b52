"""Exception types shared across the package."""


class FracvarError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(FracvarError, ValueError):
    """Raised when inputs violate a documented precondition."""


class GridMismatchError(ValidationError):
    """Raised when grid functions live on incompatible grids or dimensions."""


class NumericsError(FracvarError, RuntimeError):
    """Raised when a numerical procedure fails (blow-up, non-finite values)."""


class ConvergenceError(NumericsError):
    """Solver stopped without reaching its tolerance.

    Carries the final gradient max-norm so the failure is quantifiable.
    """

    def __init__(self, message: str, gradient_norm: float):
        super().__init__(message)
        self.gradient_norm = gradient_norm


class LineSearchError(NumericsError):
    """Backtracking line search exhausted its halving budget."""
