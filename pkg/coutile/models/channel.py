"""
Channel models.

Everything a peer may see travels in a ChannelMessage: no originator field
exists. HopPath is simulator-private bookkeeping; reading it while peer
decision logic runs raises AnonymityViolationError.
"""

from collections import Counter
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from coutile.exceptions import AnonymityViolationError
from coutile.models.computation import ComputationSpec, JointInput
from coutile.models.crypto import KeyPair, Signature, SymKey
from coutile.models.enums import ChannelEvent, ForwardActionKind, ReverseActionKind
from coutile.models.identity import Pseudonym

_PEER_LOGIC: ContextVar[bool] = ContextVar("coutile_peer_logic", default=False)


@contextmanager
def peer_logic() -> Iterator[None]:
    """Mark the enclosed code as peer decision logic for the anonymity guard."""
    token = _PEER_LOGIC.set(True)
    try:
        yield
    finally:
        _PEER_LOGIC.reset(token)


def in_peer_logic() -> bool:
    return _PEER_LOGIC.get()


class ChannelMessage(BaseModel):
    """The (msg, Ecomp) envelope as seen by its current carrier."""

    model_config = ConfigDict(frozen=True)

    msg: bytes
    ecomp: bytes
    dest: Pseudonym
    carrier: Pseudonym


class HopPath:
    """Roster positions from the originator to the final submitter."""

    __slots__ = ("_hops",)

    def __init__(self, originator: int):
        self._hops: list[int] = [originator]

    @staticmethod
    def _guard() -> None:
        if _PEER_LOGIC.get():
            raise AnonymityViolationError()

    @property
    def hops(self) -> tuple[int, ...]:
        self._guard()
        return tuple(self._hops)

    @property
    def originator(self) -> int:
        self._guard()
        return self._hops[0]

    def append(self, peer: int) -> None:
        self._guard()
        self._hops.append(peer)

    def at(self, position: int) -> int:
        self._guard()
        return self._hops[position]

    def __len__(self) -> int:
        self._guard()
        return len(self._hops)


class RosterView(BaseModel):
    """Peer-visible roster: pseudonyms and their current global reputations."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pseudonyms: tuple[Pseudonym, ...]
    reputations: np.ndarray
    positions: dict[Pseudonym, int]

    @classmethod
    def build(
        cls, pseudonyms: tuple[Pseudonym, ...], reputations: np.ndarray
    ) -> "RosterView":
        return cls(
            pseudonyms=pseudonyms,
            reputations=reputations,
            positions={p: i for i, p in enumerate(pseudonyms)},
        )

    def __len__(self) -> int:
        return len(self.pseudonyms)

    def position(self, p: Pseudonym) -> int:
        return self.positions[p]

    def reputation_of(self, p: Pseudonym) -> float:
        return float(self.reputations[self.positions[p]])


class InputBuffer(BaseModel):
    """
    A worker's Ilist for one session.

    Inputs are deduplicated by nonce. The first ``capacity`` distinct inputs
    are sealed as the session's joint input; the live list is cleared after
    each computation while seen nonces persist.
    """

    capacity: int
    entries: list[tuple[Any, bytes]] = Field(default_factory=list)
    seen_nonces: set[bytes] = Field(default_factory=set)
    sealed: tuple[Any, ...] | None = None

    def add(self, value: Any, nonce: bytes) -> bool:
        """Append an input; returns False for a duplicate nonce or a full buffer."""
        if nonce in self.seen_nonces or self.sealed is not None:
            return False
        self.seen_nonces.add(nonce)
        self.entries.append((value, nonce))
        if len(self.entries) == self.capacity:
            self.sealed = tuple(value for value, _ in self.entries)
        return True

    def joint_input(self) -> JointInput | None:
        return None if self.sealed is None else JointInput(values=self.sealed)

    def clear(self) -> None:
        self.entries.clear()


class PendingComputation(BaseModel):
    model_config = ConfigDict(frozen=True)

    ticket: int
    key: SymKey
    spec: ComputationSpec


class WorkerState(BaseModel):
    """Everything a peer holds in its worker role during one session."""

    keypair: KeyPair
    buffer: InputBuffer
    pending: list[PendingComputation] = Field(default_factory=list)


class WorkerReply(BaseModel):
    """Encrypted output E_K(out) for the dispatch identified by ``ticket``."""

    model_config = ConfigDict(frozen=True)

    ticket: int
    payload: bytes
    output: Any = None
    refused: bool = False


class ForwardAction(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ForwardActionKind
    target: Pseudonym | None = None
    degraded: bool = False
    hop_cap: bool = False


class ReverseAction(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ReverseActionKind
    target: Pseudonym | None = None
    slot: int | None = None
    plaintext: bytes | None = None
    receipt: "RewardReceipt | None" = None


class RewardReceipt(BaseModel):
    """Client commitment to reward its first forwardee, acknowledged by the forwardee."""

    model_config = ConfigDict(frozen=True)

    tag: bytes
    forwardee: Pseudonym
    commitment: Signature
    acknowledgment: Signature


class TraceRecord(BaseModel):
    """One channel event; the message id never leaves the simulator."""

    model_config = ConfigDict(frozen=True)

    iteration: int
    event: ChannelEvent
    carrier: Pseudonym
    dest: Pseudonym
    hop_index: int
    message_id: int = Field(exclude=True, repr=False)


class ChannelCounters(BaseModel):
    """Channel outcomes for one iteration, or summed over a run."""

    messages: int = 0
    hops: int = 0
    discards: int = 0
    drops: int = 0
    refusals: int = 0
    degraded: int = 0
    timeouts: int = 0
    delivery_failures: int = 0
    hop_cap_hits: int = 0
    receipts: int = 0
    audit_punishments: int = 0
    submitter_positions: Counter[int] = Field(default_factory=Counter)

    def merge(self, other: "ChannelCounters") -> None:
        for name in type(self).model_fields:
            if name == "submitter_positions":
                self.submitter_positions.update(other.submitter_positions)
            else:
                setattr(self, name, getattr(self, name) + getattr(other, name))


ReverseAction.model_rebuild()
