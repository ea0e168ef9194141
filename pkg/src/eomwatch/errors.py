"""Exception hierarchy shared across the package."""


class EomwatchError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EomwatchError):
    """Input violates a documented constraint (range, enum, shape, ...)."""


class ParseError(EomwatchError):
    """A file or record could not be parsed."""


class DataConsistencyError(EomwatchError):
    """Cross-record inconsistency, e.g. a treated parcel without events."""


class EmptyMaskError(EomwatchError):
    """Rasterization produced no pixels for a parcel."""


class MissingArtifactError(EomwatchError):
    """A pipeline stage was invoked before its prerequisite stage."""


class UnusableParcelError(EomwatchError):
    """A parcel lacks observations on one side of its anchor date."""

    def __init__(self, parcel_id: str, reason: str):
        super().__init__(f"parcel {parcel_id}: {reason}")
        self.parcel_id = parcel_id
        self.reason = reason
