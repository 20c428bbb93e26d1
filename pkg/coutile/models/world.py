"""Simulated world: roster, reputation state, event queue and seeded randomness."""

from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from coutile.core.config import SimConfig
from coutile.core.crypto import CryptoSuite
from coutile.models.channel import RosterView, TraceRecord
from coutile.models.crypto import KeyPair
from coutile.models.identity import Pseudonym, RealId
from coutile.models.reputation import LocalOpinionLedger
from coutile.utils.events import EventQueue


class PeerRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    real_id: RealId
    nonce: bytes = Field(repr=False)
    pseudonym: Pseudonym
    keypair: KeyPair
    goodness: float = Field(ge=0.0, le=1.0)
    managers: tuple[int, ...] = ()
    malicious: bool = False
    non_rewarding: bool = False


class World(BaseModel):
    """
    Single-owner simulation state.

    Identical (config, seed) pairs build identical worlds, and every random
    draw of a run goes through ``rng`` in event order.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: SimConfig
    seed: int
    peers: list[PeerRecord]
    ledger: LocalOpinionLedger
    reputation: np.ndarray
    rng: np.random.Generator
    suite: CryptoSuite
    queue: EventQueue = Field(default_factory=EventQueue)
    iteration: int = 0
    next_message_id: int = 0
    trace: list[TraceRecord] = Field(default_factory=list)
    trace_origins: dict[int, Pseudonym] = Field(default_factory=dict, repr=False)

    @cached_property
    def pseudonyms(self) -> tuple[Pseudonym, ...]:
        return tuple(peer.pseudonym for peer in self.peers)

    @cached_property
    def keys(self) -> dict[int, KeyPair]:
        return {peer.index: peer.keypair for peer in self.peers}

    @property
    def size(self) -> int:
        return len(self.peers)

    def roster_view(self) -> RosterView:
        """Snapshot of the public roster with the current global reputations."""
        return RosterView.build(self.pseudonyms, self.reputation.copy())

    def allocate_message_id(self) -> int:
        self.next_message_id += 1
        return self.next_message_id
