"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A numeric routine (quadrature, root finding, rejection sampling) failed to converge."""


class ParseError(ValueError):
    """A structured text input (CSV, config) is malformed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
