"""Joint-computation errors."""

from coutile.exceptions.base import CoutileError


class ComputationError(CoutileError):
    """Base class for computation failures."""

    pass


class EvaluationError(ComputationError):
    """A computation cannot be evaluated on the given joint input."""

    def __init__(self, message: str):
        super().__init__(message)


class MalformedSpecError(ComputationError):
    """A computation spec is incomplete or names an unknown kind."""

    def __init__(self, message: str):
        super().__init__(message)


class CodecError(ComputationError):
    """Bytes do not decode to a canonical value."""

    def __init__(self, message: str):
        super().__init__(message)
