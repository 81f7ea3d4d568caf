"""Exception types shared across the toolkit."""


class GradkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(GradkitError):
    """A camera model, solver config, or boundary spec is incomplete or inconsistent."""


class DataError(GradkitError):
    """Input data violates a documented precondition (bad normals, nonpositive depth, ...)."""


class UnsupportedDomainError(GradkitError):
    """The requested solver cannot operate on the given reconstruction domain."""


class FileFormatError(DataError):
    """A raster file is malformed; the message names the file and byte offset."""
