"""Exception types shared across the package."""


class CapanomError(Exception):
    """Base class for all capanom errors."""


class InvalidInputError(CapanomError):
    """User-supplied data cannot be used (empty, non-finite, malformed)."""


class DegenerateScaleError(CapanomError):
    """A robust scale estimate collapsed to zero."""


class DegenerateSegmentError(CapanomError):
    """A segment has zero variance and no variance guard is configured."""
