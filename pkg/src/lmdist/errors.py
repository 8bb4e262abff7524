"""Exception types shared across the package."""


class LmdistError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(LmdistError, ValueError):
    """An argument is outside its documented range."""


class ParseError(LmdistError, ValueError):
    """A text input could not be parsed; message includes the line number."""


class FormatError(LmdistError, ValueError):
    """A binary or structured input does not match the expected layout."""


class UnsupportedOperationError(LmdistError, RuntimeError):
    """The operation is not defined for this kind of input."""


class EmptySampleError(LmdistError, RuntimeError):
    """A sampling step produced no usable samples."""
