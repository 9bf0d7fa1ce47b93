"""Exception hierarchy shared by every module of the package."""


class GestlexError(Exception):
    """Base class for all package errors."""


class ConfigError(GestlexError, ValueError):
    """Invalid run configuration or argument."""


class DataError(GestlexError, ValueError):
    """Malformed or unusable feature data.

    ``line`` is the 1-based line number in the source file, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SolverError(GestlexError, RuntimeError):
    """A numerical solver failed to bracket or converge.

    ``diagnostics`` carries whatever the solver knew at the point of failure
    (last iterate, iteration count, residuals).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class EnumerationCapError(GestlexError, RuntimeError):
    """An exhaustive search would exceed the configured subset budget."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count
