"""Exception hierarchy. CLI exit codes map onto these classes."""


class SocioInfoError(Exception):
    """Base class for all package errors."""


class DataError(SocioInfoError, ValueError):
    """Input data violates a documented invariant."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class UndefinedMetricError(DataError):
    """A metric is undefined for the given labels (e.g. a single class)."""


class EnvironmentFault(SocioInfoError, OSError):
    """Filesystem or environment problem (unwritable directory, missing file)."""
