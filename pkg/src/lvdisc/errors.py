"""Exception types shared across the package."""


class LvDiscError(Exception):
    """Base class for all package errors."""


class DimensionError(LvDiscError):
    """Array shapes or sizes do not satisfy an operation's contract."""


class ScaleError(LvDiscError):
    """A rescale factor would produce a degenerate (sub-1-pixel) image."""


class SizeError(LvDiscError):
    """Template does not fit inside the search image at any usable scale."""


class FormatError(LvDiscError):
    """A file does not parse as the format its name/magic claims.

    ``offset`` carries the byte position at which parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(LvDiscError):
    """File parses, but uses a feature outside the supported subset."""


class DegenerateDiscError(LvDiscError):
    """Disc area collapsed below the numerically safe minimum."""


class FitNumericError(LvDiscError):
    """Descent produced a non-finite energy; carries the trace so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class UndefinedEFError(LvDiscError):
    """Ejection fraction is undefined (zero end-diastolic volume)."""
