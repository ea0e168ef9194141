"""eomwatch: digestate-application detection from Sentinel-2 time series.

The pipeline ingests parcel geometries and application events, extracts
masked zonal spectral indices around each application window, reduces them
to fixed-length features, and trains/evaluates four classifiers. A review
service and browser UI support the human photo-interpretation workflow.
"""

__version__ = "0.1.0"

from .errors import (
    DataConsistencyError,
    EmptyMaskError,
    EomwatchError,
    MissingArtifactError,
    ParseError,
    UnusableParcelError,
    ValidationError,
)

__all__ = [
    "DataConsistencyError",
    "EmptyMaskError",
    "EomwatchError",
    "MissingArtifactError",
    "ParseError",
    "UnusableParcelError",
    "ValidationError",
    "__version__",
]
