"""Exception types shared across the package."""


class FeatureGraphError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FeatureGraphError):
    """Invalid configuration value or argument combination."""


class DataError(FeatureGraphError):
    """Problem with input data: I/O failure, bad shape, non-finite values."""


class ParseError(DataError):
    """Malformed data file.

    Carries the path and 1-based line number of the offending line when known.
    """

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        if loc:
            message = f"{loc}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class NumericError(FeatureGraphError):
    """Numerical failure: solver breakdown or non-finite intermediate."""


class SchemaError(DataError):
    """A stored document does not match the expected schema."""


class VersionError(DataError):
    """A stored document uses an unsupported format version."""
