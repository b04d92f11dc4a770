"""Exception and warning classes shared across the package."""


class SmilanskyError(Exception):
    """Base class for numerical failures raised by this package."""


class BranchCutError(SmilanskyError, ValueError):
    """A branch-dependent quantity was requested on its cut [n + 1/2, oo)."""


class DomainError(SmilanskyError, ValueError):
    pass


class NotSymmetricError(SmilanskyError, ValueError):
    pass


class SingularMatrixError(SmilanskyError, ArithmeticError):
    def __init__(self, pivot, msg=None):
        self.pivot = pivot
        super().__init__(msg or f"exactly zero pivot at index {pivot}")


class ConvergenceError(SmilanskyError, ArithmeticError):
    pass


class HerglotzViolation(SmilanskyError, ArithmeticError):
    pass


class DegenerateFitError(SmilanskyError, ValueError):
    pass


class QuadratureError(SmilanskyError, ArithmeticError):
    pass


class TruncationUnstable(SmilanskyError):
    """A truncated computation changed its answer when the size doubled."""


class MethodDisagreement(SmilanskyError):
    """Two independent routes to the same quantity disagree."""


class NoMinimalSolutionWarning(UserWarning):
    """The recurrence has no solution that is dominated by all others."""


class HermiteUnderflowWarning(UserWarning):
    """Every requested Hermite function value underflowed to zero."""
