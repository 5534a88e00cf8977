"""Exception hierarchy shared by the library and the CLI."""


class OrcPoolError(Exception):
    """Base class for all errors raised by orcpool."""


class ValidationError(OrcPoolError, ValueError):
    """Malformed input: bad edges, shapes, or file contents."""


class ParameterError(ValidationError):
    """A generator or operation parameter violates its precondition."""


class StateError(OrcPoolError, RuntimeError):
    """An operation was requested on an object lacking required data."""


class NumericError(OrcPoolError, ArithmeticError):
    """Infeasible or non-finite numerical result."""
