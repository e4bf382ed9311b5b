"""Exception hierarchy shared by every module."""


class PouError(Exception):
    """Base class for all library errors."""


class InputError(PouError, ValueError):
    """Arguments violate an operation's preconditions."""


class ConvergenceError(PouError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class UnsupportedOrderError(InputError):
    """Requested derivative or subtraction order is beyond the engine limit."""


class IndeterminateOrderError(PouError):
    """Singular order cannot be read off because the data is not a clean power law."""


class DegenerateDecompositionError(InputError):
    """Partial-fraction decomposition requested with coincident masses."""


class NonIntegrableError(InputError):
    """Subtraction order too low for the extended distribution to be integrable."""
