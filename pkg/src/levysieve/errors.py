"""Exception types.  All validation failures derive from ``ValueError``."""


class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class UnsupportedDegreeError(ValueError):
    """Polynomial degree not supported by the requested operation."""


class SpacingError(ValueError):
    """Observation times are not evenly spaced."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
