"""Exception hierarchy shared by every module."""


class CountdecError(Exception):
    """Base class for all errors raised by countdec."""


class DomainError(CountdecError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ContractViolation(DomainError):
    """Input structure breaks a documented precondition (e.g. overlapping intervals)."""


class ConfigurationError(CountdecError, ValueError):
    """A run configuration is infeasible or inconsistent."""


class BudgetExceeded(CountdecError):
    """An enumeration would exceed its configured work or memory budget."""

    def __init__(self, what: str, required: int, budget: int):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(f"{what}: requires {required} units, budget is {budget}")


class InvariantViolation(CountdecError):
    """A mathematical invariant that must always hold was observed to fail."""


class ConvergenceError(CountdecError):
    """Quadrature refinement did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float):
        self.estimate = estimate
        super().__init__(f"{message} (best estimate {estimate!r})")


class AccuracyWarning(UserWarning):
    """Two quadrature refinement levels disagree beyond the requested tolerance."""
