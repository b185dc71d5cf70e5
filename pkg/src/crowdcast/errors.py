"""Exception types shared across the package."""


class CrowdcastError(Exception):
    """Base class for package errors."""


class ValidationError(CrowdcastError):
    """Bad input data, configuration, or arguments (CLI exit code 1)."""


class SchemaMismatchError(CrowdcastError):
    """A model was asked to score instances built under a different schema."""
