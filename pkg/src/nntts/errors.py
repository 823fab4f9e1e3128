"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: DataError -> 2, ModelError -> 3.
"""


class NnttsError(Exception):
    """Base class for all package errors."""


class DataError(NnttsError):
    """Malformed input data: corpus files, lexica, WAV files, frame dumps."""


class ModelError(NnttsError):
    """Model-level failure: weight files, dimension mismatches, training aborts."""
