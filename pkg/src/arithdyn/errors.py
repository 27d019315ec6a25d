"""Exception hierarchy shared by every module.

The CLI maps each class to an exit code, so the split matters:
input problems, unsupported sizes and numeric breakdowns are kept apart.
"""


class ArithDynError(Exception):
    """Base class for all errors raised by the package."""


class InputError(ArithDynError, ValueError):
    """Malformed or mathematically invalid input."""


class ParseError(InputError):
    """Polynomial text could not be parsed."""

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ModelError(InputError):
    """The lift does not define a valid model (degree mismatch, zero resultant, ...)."""


class CapabilityError(ArithDynError):
    """The input is valid but exceeds what this implementation supports."""


class BudgetError(CapabilityError):
    """A configured size budget (coefficient bits, node count, ...) was exceeded."""


class IndeterminateError(ArithDynError):
    """An exact computation could not be decided (e.g. a singular Macaulay minor)."""


class NumericFailure(ArithDynError):
    """A numeric routine failed to converge.

    ``residual`` carries the best residual that was achieved.
    """

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")


class UnsupportedGeometry(ArithDynError):
    """p-adic root configuration not handled in strict mode."""
