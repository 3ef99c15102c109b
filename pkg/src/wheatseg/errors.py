"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
TrainingError -> 4.
"""


class WheatsegError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(WheatsegError):
    """Invalid or inconsistent configuration."""


class DataError(WheatsegError):
    """Missing, malformed, or insufficient input data."""


class DecodeError(DataError):
    """A file exists but cannot be decoded as image or video."""


class ChecksumError(DataError):
    """Checkpoint content does not match its recorded checksum."""


class EmptyAnnotationError(DataError):
    """An annotation mask contains no foreground pixels."""


class NotFoundError(DataError):
    """A referenced record (e.g. curation candidate) does not exist."""


class ShapeError(WheatsegError, ValueError):
    """Array dimensions or channel counts violate an operation's contract."""


class BoundsError(ShapeError):
    """A patch placement exceeds the bounds of its target buffer."""


class TrainingError(WheatsegError):
    """Numeric failure during optimization (non-finite losses etc.)."""
