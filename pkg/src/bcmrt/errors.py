"""Exception types shared across the package."""


class BcmrtError(Exception):
    """Base class for all package errors."""


class ParameterError(BcmrtError, ValueError):
    """An argument is outside its admissible range."""


class SettingError(BcmrtError, ValueError):
    """A statistic was requested in an observation setting that hides the
    information it needs (e.g. collision counts without time labels)."""


class StructureError(BcmrtError, ValueError):
    """The input does not describe a valid tree."""


class InfeasibleSizeError(BcmrtError, ValueError):
    """An exhaustive operation was requested beyond its size cap."""


class ConfigError(BcmrtError, ValueError):
    """A configuration file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
