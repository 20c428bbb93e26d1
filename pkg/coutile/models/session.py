"""Joint-computation session models."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from coutile.exceptions import ConfigurationError
from coutile.models.channel import ChannelCounters, RewardReceipt
from coutile.models.computation import ComputationSpec
from coutile.models.crypto import SymKey

MIN_CLIENTS = 4


class Session(BaseModel):
    """
    One joint computation agreed by ``clients``.

    ``inputs[k]`` is the private input of ``clients[k]``. ``kappas`` optionally
    pins κ_i per client; missing entries are drawn when workers are selected.
    """

    model_config = ConfigDict(frozen=True)

    clients: tuple[int, ...]
    inputs: tuple[Any, ...]
    computation: ComputationSpec
    redundancy: int = Field(ge=1)
    kappas: dict[int, int] = Field(default_factory=dict, repr=False)

    @model_validator(mode="after")
    def check_session(self) -> "Session":
        if len(self.clients) < MIN_CLIENTS:
            raise ConfigurationError(
                f"clients (m) must be ≥ {MIN_CLIENTS}", "clients"
            )
        if len(set(self.clients)) != len(self.clients):
            raise ConfigurationError("session clients must be distinct", "clients")
        if len(self.inputs) != len(self.clients):
            raise ConfigurationError("one input per client is required", "clients")
        for client, kappa in self.kappas.items():
            if kappa <= self.redundancy:
                raise ConfigurationError(
                    f"κ of client {client} must be > redundancy (r)", "kappa_max"
                )
        return self

    def input_of(self, client: int) -> Any:
        return self.inputs[self.clients.index(client)]


class DispatchRecord(BaseModel):
    """What a client remembers about one computation dispatch to one worker."""

    client: int
    worker: int
    ticket: int
    key: SymKey
    tag: bytes
    first_hop: int | None = None
    returned: bool = False
    failed: bool = False
    refused: bool = False
    completed_reverse: bool = False
    output: Any = None
    receipt: RewardReceipt | None = None


class WorkerSlate(BaseModel):
    """A client's secret worker choice and the outputs they returned."""

    client: int
    workers: tuple[int, ...]
    returned: list[Any] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_distinct(self) -> "WorkerSlate":
        if len(set(self.workers)) != len(self.workers):
            raise ConfigurationError("workers must be distinct", "redundancy")
        if self.client in self.workers:
            raise ConfigurationError("a client cannot be its own worker", "redundancy")
        return self


class BulletinPost(BaseModel):
    """An output published by a worker in published-output mode."""

    model_config = ConfigDict(frozen=True)

    worker: int
    output: Any = None


class SessionResult(BaseModel):
    outputs: dict[int, Any]
    expected: dict[int, Any]
    correct: dict[int, bool]
    slates: list[WorkerSlate]
    counters: ChannelCounters
    bulletin: list[BulletinPost] = Field(default_factory=list)
