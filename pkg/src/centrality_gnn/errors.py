"""Exception hierarchy shared by every module of the package."""


class CentralityGnnError(Exception):
    """Base class for all package errors."""


class InputError(CentralityGnnError, ValueError):
    pass


class ParseError(InputError):
    """Malformed graph file. ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class GenerationError(CentralityGnnError, RuntimeError):
    pass


class ConvergenceError(CentralityGnnError, RuntimeError):
    pass


class ShapeError(CentralityGnnError, ValueError):
    pass


class UsageError(CentralityGnnError, RuntimeError):
    pass


class NumericError(CentralityGnnError, FloatingPointError):
    pass


class CheckpointError(CentralityGnnError, IOError):
    pass


class ConfigError(CentralityGnnError, ValueError):
    pass
