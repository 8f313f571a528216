"""Shared exception types."""


class FormatError(ValueError):
    """A corpus or feature file violates its on-disk format."""


class ConfigError(ValueError):
    """A run configuration is missing, malformed, or inconsistent."""
