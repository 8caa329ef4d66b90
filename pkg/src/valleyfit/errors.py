"""Exception types shared across the package."""


class ValleyfitError(Exception):
    """Base class for all package errors."""


class SpectrumFormatError(ValleyfitError):
    """Malformed spectrum file. Carries the offending row/column when known."""

    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc += f" (row {row}"
            loc += f", col {col})" if col is not None else ")"
        elif col is not None:
            loc += f" (col {col})"
        super().__init__(message + loc)
        self.row = row
        self.col = col


class DegenerateRangeError(ValleyfitError):
    """Constant matrix: min == max, unit-range normalization undefined."""


class ResolutionError(ValleyfitError):
    """Filter scale below the half-pixel resolution floor."""


class GroupingError(ValleyfitError):
    """Contour referenced by no extraction run, or assigned to two groups."""


class ExtractionError(ValleyfitError):
    """Peak extraction cannot proceed (missing masks, missing raw spectrum, ...)."""


class FitError(ValleyfitError):
    """Fitting precondition violated or fit did not converge."""


class FitCancelled(ValleyfitError):
    """Fit aborted by a cancellation request."""


class TruncationError(ValleyfitError):
    """Requested basis truncation is invalid or exceeds the matrix-size cap."""


class StageError(ValleyfitError):
    """Pipeline stage ordering violated (e.g. extraction before assignment)."""
