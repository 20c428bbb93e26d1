"""Protocol misuse errors.

Observable protocol outcomes (discards, refusals, timeouts, missing receipts)
are not errors: they are recorded as run metrics. The exceptions below signal
that a caller broke a rule of the protocol itself.
"""

from coutile.exceptions.base import CoutileError


class ProtocolError(CoutileError):
    """Base class for protocol rule violations."""

    pass


class SelfRatingError(ProtocolError):
    """A peer tried to record an opinion about itself."""

    def __init__(self, peer: int):
        self.peer = peer
        super().__init__(f"Peer {peer} cannot rate itself")


class NoForwardeeError(ProtocolError):
    """No peer satisfies the forwardee selection rule."""

    def __init__(self, lower: float | None, upper: float):
        self.lower = lower
        self.upper = upper
        if lower is None:
            window = f"reputation ≤ {upper:.6f}"
        else:
            window = f"reputation window [{lower:.6f}, {upper:.6f}]"
        super().__init__(f"No forwardee available for {window}")


class AnonymityViolationError(ProtocolError):
    """Peer decision logic touched simulator-private path bookkeeping."""

    def __init__(self, message: str = "Peer logic read simulator-private path data"):
        super().__init__(message)


class IdentityError(ProtocolError):
    """Invalid identity material (empty nonce, unknown pseudonym)."""

    def __init__(self, message: str):
        super().__init__(message)
