"""Exception types shared across the package.

The CLI maps these onto process exit codes: I/O failures exit 1,
validation and format problems exit 2, internal invariant violations
exit 3.
"""


class ValidationError(ValueError):
    """Raised when user-supplied data or parameters fail validation."""


class FormatError(ValidationError):
    """Raised when a file does not conform to its container format.

    Parameters
    ----------
    message : str
        Human-readable description.
    offset : int, optional
        Byte offset in the file where the problem was detected.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = "%s (at byte offset %d)" % (message, offset)
        super().__init__(message)
        self.offset = offset


class GenerationError(ValidationError):
    """Raised when a synthetic-instance request cannot be satisfied."""


class InternalError(RuntimeError):
    """Raised when an internal invariant is violated."""
