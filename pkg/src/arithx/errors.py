"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class ArithxError(Exception):
    exit_code = 2


class DomainError(ArithxError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PreconditionError(ArithxError, ValueError):
    """A documented precondition (order condition, size bound, ...) fails."""


class UnsupportedRegimeError(ArithxError, ValueError):
    pass


class BudgetExceededError(ArithxError, RuntimeError):
    exit_code = 3

    def __init__(self, what, requested, limit):
        self.requested = requested
        self.limit = limit
        super().__init__(f"{what}: {requested} exceeds enumeration budget {limit}")


class InvariantViolation(ArithxError, AssertionError):
    exit_code = 1


DEFAULT_BUDGET = 10**7


def check_budget(what, requested, budget=None):
    limit = DEFAULT_BUDGET if budget is None else budget
    if requested > limit:
        raise BudgetExceededError(what, requested, limit)
