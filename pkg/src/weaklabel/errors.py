"""Exception types shared across the package."""


class WeakLabelError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(WeakLabelError):
    """A corpus file is structurally malformed.

    Carries the byte offset at which parsing failed when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ValidationError(WeakLabelError):
    """Data parsed correctly but violates a corpus invariant."""


class MissingClassNameError(WeakLabelError):
    """No token of a class name occurs in the corpus vocabulary."""

    def __init__(self, class_name: str):
        super().__init__(f"class name {class_name!r} has no token in the corpus vocabulary")
        self.class_name = class_name


class DegenerateTrainingError(WeakLabelError):
    """The pseudo-label set cannot support classifier training."""


class NumericError(WeakLabelError):
    """A numerical routine produced an invalid result."""
