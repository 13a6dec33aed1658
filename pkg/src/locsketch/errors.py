"""Exception types shared across the package."""


class LocsketchError(Exception):
    """Base class for all package errors."""


class SequenceFormatError(LocsketchError):
    """A sequence file or string contains something other than '0'/'1'.

    ``offset`` is the 0-based position of the first offending character.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class SketchFormatError(LocsketchError):
    """A serialized sketch is malformed. ``field`` names the bad header
    field or ``"payload"``."""

    def __init__(self, message: str, field: str):
        super().__init__(message)
        self.field = field


class IncompatibleSketchError(LocsketchError):
    """Two sketches cannot be compared. ``field`` names the first
    mismatched parameter."""

    def __init__(self, message: str, field: str):
        super().__init__(message)
        self.field = field
