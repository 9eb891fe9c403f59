"""Exception types shared across the numerical modules."""


class InvalidParamError(ValueError):
    """A parameter is outside its documented domain."""


class NonConvergenceError(ArithmeticError):
    """A series or iteration failed to reach the requested accuracy.

    Raised when the term budget is exhausted, or when cancellation in an
    alternating sum destroys more precision than the working arithmetic
    (double, escalating to double-double) can absorb.
    """


class EvaluationOverflowError(OverflowError):
    """The requested unscaled value exceeds the double floating range."""


class InvalidIntervalError(ValueError):
    """An integration interval is degenerate or reversed."""


class EmptyInputError(ValueError):
    """An operation that needs at least one sample received none."""


class ToleranceNotMet(RuntimeWarning):
    """A quadrature-backed quantity was returned below requested accuracy.

    Emitted as a warning, not an exception: the value is still usable, the
    stated tolerance just could not be certified.
    """
