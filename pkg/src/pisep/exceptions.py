"""Exception hierarchy.

Validation errors map to CLI exit code 2, numerical-consistency errors to
exit code 3.
"""


class PisepError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PisepError, ValueError):
    """Invalid argument, state, or parameter."""


class DimensionError(ValidationError):
    """Qubit count outside the supported range."""


class UnsupportedInputError(ValidationError):
    """Input type is valid in general but not supported by this operation."""


class NumericalError(PisepError, ArithmeticError):
    """A computed quantity failed a consistency check."""


class ReconstructionError(NumericalError):
    """Linear inversion of measurement data is singular or ill-conditioned."""
