class GrapheneError(Exception):
    """Base class for engine errors."""


class UDFError(GrapheneError):
    """A user function raised while processing the tuple keyed by ``key``."""

    def __init__(self, key, cause):
        super().__init__(f"UDF failed on key {key!r}: {cause!r}")
        self.key = key
        self.cause = cause


class CorruptBlockError(GrapheneError):
    """A shuffle block could not be decoded."""


class ConfigError(GrapheneError, ValueError):
    pass


class AccessViolation(GrapheneError):
    """A triplet UDF read a vertex side its access declaration left out."""


class DataError(GrapheneError):
    """Malformed input data (bad edge-list lines, invalid vertex ids)."""

    def __init__(self, message, bad_lines=()):
        super().__init__(message)
        self.bad_lines = list(bad_lines)
