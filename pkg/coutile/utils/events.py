"""Discrete-event queue with deterministic ordering: (time, insertion order)."""

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any


@dataclass(order=True, slots=True)
class ScheduledEvent:
    time: int
    seq: int
    kind: str = field(compare=False)
    payload: Any = field(compare=False, default=None)


class EventQueue:
    def __init__(self) -> None:
        self._heap: list[ScheduledEvent] = []
        self._seq = itertools.count()
        self.now = 0

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def schedule(self, delay: int, kind: str, payload: Any = None) -> ScheduledEvent:
        event = ScheduledEvent(self.now + delay, next(self._seq), kind, payload)
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> ScheduledEvent:
        event = heapq.heappop(self._heap)
        self.now = event.time
        return event

    def reset(self) -> None:
        self._heap.clear()
        self._seq = itertools.count()
        self.now = 0
