"""Exception and warning types.

Input problems derive from :class:`ValidationError` (the CLI maps them to
exit code 2); numerical failures derive from :class:`NumericError` (exit 1).
"""


class MaxDivError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MaxDivError, ValueError):
    """Input does not satisfy an operation's preconditions."""


class NumericError(MaxDivError, ArithmeticError):
    """A computation failed or produced an unusable result."""


# spaces
class NonSquare(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class NonpositiveDiagonal(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonmetricPrecomputed(ValidationError):
    pass


class NotMetricOrigin(ValidationError):
    pass


# means / diversity
class NotProbability(ValidationError):
    pass


class NonpositiveValueOnSupport(ValidationError):
    pass


class SizeMismatch(ValidationError):
    pass


class NoSignChange(ValidationError):
    pass


class TypicalityUnderflow(NumericError):
    """Typicality on the support fell below the representable floor."""


class MonotonicityViolation(NumericError):
    """A sequence that must be monotone was not, beyond rounding slack."""


# magnitude / maximisation
class Asymmetric(ValidationError):
    """The operation needs a symmetric kernel."""


class Inconsistent(NumericError):
    """Singular kernel with the all-ones vector outside its range."""


class ZeroTotal(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class NotConverged(NumericError):
    """Iteration budget exhausted; ``partial`` holds the last iterate's result."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonUniqueSuspected(NumericError):
    """Independent restarts disagree, so the maximising measure may not be unique."""


class NegativeOrderWarning(UserWarning):
    """Diversity was requested at an order below zero."""


class NonConvexWarning(UserWarning):
    """Kernel is not positive semidefinite; the numeric optimum is only local."""


class ResolutionWarning(UserWarning):
    """Scale factor is too large for the discretization to resolve."""
