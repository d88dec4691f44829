"""Exception types raised by csmaline."""


class CsmaLineError(Exception):
    """Base class for all library errors."""


class InvalidConfig(CsmaLineError, ValueError):
    """A network or simulation configuration violates its invariants."""


class EnumerationTooLarge(CsmaLineError):
    """The feasible state space is too large to enumerate."""


class InvalidRange(CsmaLineError, ValueError):
    """An argument lies outside the range an operation supports."""


class ConvergenceFailure(CsmaLineError, ArithmeticError):
    """An iterative numerical method did not reach its tolerance."""
