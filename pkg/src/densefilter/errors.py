"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: usage errors -> 1, data errors -> 2,
pipeline errors -> 3.
"""


class DensefilterError(Exception):
    """Base class for all toolkit errors."""


class DataError(DensefilterError):
    """Malformed or invalid input data (files, indices, labels)."""


class PipelineError(DensefilterError):
    """A pipeline stage cannot proceed (degenerate input, emptied class, ...)."""
