"""Exception types shared across the package."""


class SsvepError(Exception):
    """Base class for all package errors."""


class FormatError(SsvepError):
    """Malformed dataset file or trial record."""


class DesignError(SsvepError):
    """Filter design could not meet its specification."""

    def __init__(self, message: str, achieved_attenuation_db: float | None = None):
        super().__init__(message)
        self.achieved_attenuation_db = achieved_attenuation_db


class ConfigError(SsvepError):
    """Invalid experiment configuration."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class StageError(SsvepError):
    """A pipeline stage failed while evaluating a fold."""

    def __init__(self, stage: str, fold: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed in fold '{fold}': {cause}")
        self.stage = stage
        self.fold = fold
        self.cause = cause
