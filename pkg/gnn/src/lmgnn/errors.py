"""Exception types for the learned-embedding package."""


class LmgnnError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(LmgnnError, ValueError):
    """An argument is out of range or inconsistent."""


class FormatError(LmgnnError, ValueError):
    """A file does not follow the expected interchange layout."""


class TrainingError(LmgnnError, RuntimeError):
    """Optimization diverged or could not produce a usable model."""


class CoreCliError(LmgnnError, RuntimeError):
    """The core command-line tool failed or is not installed."""
