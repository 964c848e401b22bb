"""Exception hierarchy. Every validation error is a ``QuotaError``."""


class QuotaError(ValueError):
    """Base class for input and precondition failures."""


class InvalidAlphabet(QuotaError):
    pass


class InvalidSymbol(QuotaError):
    pass


class NonPositiveCount(QuotaError):
    pass


class SizeMismatch(QuotaError):
    pass


class LengthMismatch(QuotaError):
    pass


class MessageNotInM(QuotaError):
    """A reported vector whose signal counts differ from the quota."""


class NotBalanced(QuotaError):
    pass


class TooLarge(QuotaError):
    pass


class PreconditionViolated(QuotaError):
    pass


class Infeasible(QuotaError):
    pass


class BudgetExceeded(QuotaError):
    def __init__(self, pairs: int, budget: int) -> None:
        super().__init__(f"{pairs} pairs exceeds budget of {budget}")
        self.pairs = pairs
        self.budget = budget


class ParseError(QuotaError):
    pass


class BalancedBoundBroken(RuntimeError):
    """Raised when a maximum balanced subset leaves no mismatched task to start a witness.

    This can only happen if the cardinality bound on the balanced subset is false,
    so it is deliberately not a ``QuotaError`` and should never be caught quietly.
    """
