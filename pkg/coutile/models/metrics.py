"""Run metrics and the aggregates behind the figure CSVs."""

from collections import defaultdict

from pydantic import BaseModel, Field

from coutile.models.channel import ChannelCounters
from coutile.models.enums import ClientClass, Mode


class RequestRecord(BaseModel):
    """One client request: who asked, its reputation at request time, and the outcome."""

    iteration: int
    client: int
    client_reputation: float
    output_correct: bool


class IterationMetrics(BaseModel):
    iteration: int
    records: list[RequestRecord]
    counters: ChannelCounters
    reputation_rounds: int = 0
    reputation_converged: bool = True


class PeerRate(BaseModel):
    peer_index: int
    final_reputation: float
    requests: int
    correct: int

    @property
    def rate(self) -> float:
        return self.correct / self.requests


class ClassRate(BaseModel):
    client_class: ClientClass
    requests: int
    correct: int

    @property
    def rate(self) -> float:
        return self.correct / self.requests


class RunMetrics(BaseModel):
    """
    Everything a run produces.

    Iteration numbers are 1-based, so a window of the last k iterations of a
    T-iteration run covers iterations T-k+1..T.
    """

    mode: Mode
    seed: int
    malicious_frac: float
    iterations: int
    goodness: list[float]
    final_reputation: list[float]
    records: list[RequestRecord] = Field(default_factory=list)
    per_iteration: list[IterationMetrics] = Field(default_factory=list)
    counters: ChannelCounters = Field(default_factory=ChannelCounters)

    def windowed(self, window: int | None = None) -> list[RequestRecord]:
        if window is None:
            return list(self.records)
        first = self.iterations - window + 1
        return [record for record in self.records if record.iteration >= first]

    def peer_rates(self, window: int | None = None) -> list[PeerRate]:
        """Per-client request and correct counts; peers that never asked are omitted."""
        requests: dict[int, int] = defaultdict(int)
        correct: dict[int, int] = defaultdict(int)
        for record in self.windowed(window):
            requests[record.client] += 1
            correct[record.client] += int(record.output_correct)
        return [
            PeerRate(
                peer_index=peer,
                final_reputation=self.final_reputation[peer],
                requests=requests[peer],
                correct=correct[peer],
            )
            for peer in sorted(requests)
        ]

    def class_rates(self, window: int | None = None) -> list[ClassRate]:
        """Correct rates of good (goodness ≥ 0.5) clients, bad clients and all clients."""
        totals = {cls: [0, 0] for cls in ClientClass}
        for record in self.windowed(window):
            side = (
                ClientClass.GOOD
                if self.goodness[record.client] >= 0.5
                else ClientClass.BAD
            )
            for cls in (side, ClientClass.ALL):
                totals[cls][0] += 1
                totals[cls][1] += int(record.output_correct)
        return [
            ClassRate(client_class=cls, requests=requests, correct=correct)
            for cls, (requests, correct) in totals.items()
            if requests
        ]


class SweepRow(BaseModel):
    malicious_frac: float
    mode: Mode
    client_class: ClientClass
    rate: float
