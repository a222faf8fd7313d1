"""Exception types raised across the package."""


class QNDError(Exception):
    """Base class."""


class SpecMismatch(QNDError):
    pass


class NotNilpotent(QNDError):
    pass


class ReexpansionError(QNDError):
    """A matrix did not lie in the span of the algebra basis."""


class TwoStepViolation(QNDError):
    pass


class IndiscreteSpan(QNDError):
    pass


class DegenerateBasis(QNDError):
    pass


class BoxTooLarge(QNDError):
    pass


class BudgetExceeded(QNDError):
    """Enumeration budget exhausted.

    ``partial`` carries whatever was computed before the budget ran out; for
    measures it is a lower bound.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PreconditionViolation(QNDError):
    pass


class ConditionStarViolation(QNDError):
    def __init__(self, word, factor, trace):
        super().__init__(
            f"element {word!r} projects to an elliptic element in factor {factor} (trace {trace})"
        )
        self.word = word
        self.factor = factor
        self.trace = trace


class NegativeFunction(QNDError):
    pass


class ConfigError(QNDError):
    pass
