"""Exception hierarchy shared by every module in the package."""


class OvertakeError(Exception):
    """Base class for all package errors."""


class DomainError(OvertakeError, ValueError):
    """An argument lies outside the domain of the primitive or operation."""


class StructuralError(OvertakeError, ValueError):
    """Array lengths or container shapes are inconsistent."""


class UnknownFamilyError(OvertakeError, ValueError):
    """A serialized model names a family this package does not implement."""

    def __init__(self, family):
        super().__init__(f"unknown model family: {family!r}")
        self.family = family


class ConvergenceError(OvertakeError, RuntimeError):
    """Shooting failed to bracket or resolve the terminal condition.

    ``bracket`` holds the last ``(low, high)`` interval examined and
    ``horizon`` the horizon being solved, when known.
    """

    def __init__(self, message, bracket=None, horizon=None):
        super().__init__(message)
        self.bracket = bracket
        self.horizon = horizon

    def __str__(self):
        msg = super().__str__()
        if self.horizon is not None:
            msg += f" (T={self.horizon})"
        if self.bracket is not None:
            lo, hi = self.bracket
            msg += f" [bracket {lo!r}, {hi!r}]"
        return msg


class SignConventionError(DomainError):
    """Utility is not strictly negative where the ratio comparator needs it."""


class DegenerateComparisonError(OvertakeError, ZeroDivisionError):
    """A catch-up ratio has a zero denominator."""


class InfeasiblePathError(DomainError):
    """A path violates a feasibility constraint; ``violation`` says which."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation
