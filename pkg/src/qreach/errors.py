"""Shared exception types."""


class ParseError(ValueError):
    """Malformed input text; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NotRepresentable(ValueError):
    """A value does not belong to the requested number format."""


class DimensionMismatch(ValueError):
    """Vector/matrix dimensions do not line up."""


class WidthMismatch(ValueError):
    """Bit-vector widths disagree."""


class UnboundVariable(KeyError):
    """An assignment is missing a declared variable."""


class UnsupportedFormat(ValueError):
    """A backend was asked for a mode it deliberately does not handle."""


class BackendUnavailable(ValueError):
    """No backend can decide the given instance as posed."""


class SearchSpaceTooLarge(RuntimeError):
    """An enumeration guard tripped before the search started."""


class BudgetExceeded(RuntimeError):
    """An exploration ran out of its state or time budget mid-flight.

    Distinct from both verdicts: callers must surface this as a resource
    outcome, never as valid/invalid.
    """
