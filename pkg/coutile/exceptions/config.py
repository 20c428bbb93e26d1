"""Configuration errors raised while building a simulation configuration."""

from coutile.exceptions.base import CoutileError


class ConfigurationError(CoutileError):
    """A configuration value or combination of values is not allowed."""

    def __init__(self, message: str, field: str | None = None):
        """
        Create a ConfigurationError naming the violated constraint.

        Parameters:
            message (str): Human-readable description of the violated constraint.
            field (str | None): Name of the offending configuration field, when there is one.
        """
        self.field = field
        super().__init__(message)
