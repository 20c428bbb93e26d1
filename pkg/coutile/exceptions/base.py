"""Base exception for all engine and simulator errors."""


class CoutileError(Exception):
    """Base exception for all coutile errors."""

    pass
