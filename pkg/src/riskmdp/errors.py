"""Exception hierarchy shared by all riskmdp modules."""


class RiskMdpError(Exception):
    """Base class for every error raised by riskmdp."""


class MdpFormatError(RiskMdpError, ValueError):
    """A model document could not be parsed.

    ``location`` is a human readable pointer such as ``"line 4"`` or
    ``"transitions[2].prob"``.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class MdpValidationError(RiskMdpError, ValueError):
    """An MDP violates its structural invariants."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid MDP: {lines}")


class PolicyError(RiskMdpError, ValueError):
    """A policy is malformed or does not match the MDP it is applied to."""


class UtilityRangeError(RiskMdpError, OverflowError):
    """An exponential quantity would leave the double precision range."""


class BudgetExceededError(RiskMdpError):
    """An exact enumeration would exceed its work budget."""


class GuardExceededError(RiskMdpError):
    """Policy enumeration would exceed the configured guard."""

    def __init__(self, count, guard):
        self.count = count
        self.guard = guard
        super().__init__(
            f"{count} stationary deterministic policies exceed the guard of {guard}"
        )


class SingularMatrixError(RiskMdpError, ArithmeticError):
    """A linear system that should be regular is numerically singular."""


class IncompatibleUtilityError(RiskMdpError, ValueError):
    """The utility function does not carry the parameters a check needs."""


class PreconditionError(RiskMdpError):
    """An operation was called outside the regime where it is guaranteed to work."""


class ConvergenceError(RiskMdpError):
    """An iterative method failed to converge.

    ``trace`` holds the residual history (possibly thinned).
    """

    def __init__(self, message, trace=()):
        self.trace = list(trace)
        super().__init__(message)
