"""Exception types shared across the package."""


class GcadError(Exception):
    """Base class for all gcad errors."""


class GraphFormatError(GcadError, ValueError):
    """Raised for malformed or inconsistent graph input data."""


class ConfigError(GcadError, ValueError):
    """Raised for invalid detector or pipeline configuration."""


class NumericError(GcadError, ValueError):
    """Raised when non-finite values make a computation meaningless."""
