"""
Domain exceptions.

Services raise these; the HTTP layer maps them to status codes in `main.py`
and the CLI maps them to exit codes in `cli.py`.
"""


class BnmError(Exception):
    """Base class for every planner error."""
    status_code = 400


class BoundsError(BnmError):
    """A cell or move lies outside the map."""
    status_code = 422


class BudgetError(BnmError):
    """A move was requested with no remaining budget."""
    status_code = 422


class MapFormatError(BnmError):
    """A map file does not follow the `W H` + rows format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PolicyFormatError(BnmError):
    """A policy file is truncated, mislabelled or from another version."""


class EncodingError(BnmError):
    """An inspection state field is outside its range."""


class ShapeError(BnmError):
    """Two grids that must align have different dimensions."""


class NumericError(BnmError):
    """A non-finite value reached the value table."""


class ConfigurationError(BnmError):
    """Inputs are individually valid but cannot be combined."""
