"""Exception hierarchy.

Everything raised on bad input is a ``ValueError`` subclass so callers that
only care about "invalid argument" can catch that. The CLI maps
``ConfigError`` to exit code 2 and ``DataError`` to exit code 3.
"""


class WptError(Exception):
    """Base class for all package errors."""


class ConfigError(WptError, ValueError):
    """Invalid configuration or argument combination."""


class OutOfRangeError(WptError, ValueError):
    """A query falls outside a table's defined range."""


class DataError(WptError, ValueError):
    """Measurement data failed to parse or validate."""


class TraceParseError(DataError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
