"""Exception hierarchy shared across the package."""


class DsymorbError(Exception):
    """Base class for all package-specific errors."""


class CollisionProximity(DsymorbError):
    """A body distance fell below the collision guard radius."""


class IntegrationError(DsymorbError):
    """Base class for propagation failures."""


class StepSizeUnderflow(IntegrationError):
    """Step control pushed h below h_min while the error was still too large."""


class MaxStepsExceeded(IntegrationError):
    """The step budget ran out before the propagation goal was reached."""


class CrossingNotFound(IntegrationError):
    """The requested plane crossing did not occur before t_max."""


class NoRootInInterval(DsymorbError):
    """The refinement cubic has no real root inside the unit interval."""


class SolverError(DsymorbError):
    """Base class for root-finder failures."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SingularJacobian(SolverError):
    """QR factors of the approximate Jacobian are rank deficient."""


class LineSearchStall(SolverError):
    """Backtracking could not reduce the merit function."""


class NonDescentDirection(SolverError):
    """The proposed step is not a descent direction for the merit function."""


class MaxIterExceeded(SolverError):
    """The iteration budget ran out before the residual tolerance was met."""


class CatalogFormatError(DsymorbError):
    """A catalog file does not match the expected schema."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class TimeBudgetExceeded(DsymorbError):
    """A sweep case ran past its per-case wall-clock budget."""
