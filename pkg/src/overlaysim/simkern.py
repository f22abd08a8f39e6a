"""Minimal deterministic discrete-event kernel.

One global queue ordered by (fire time, sequence number); entities are
handlers keyed by id. The kernel never looks inside payloads.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Optional, TextIO

from .errors import InvalidConfig, SchedulingInPast


@dataclass(frozen=True)
class LatencyConfig:
    hop_latency: float = 1.0
    match_cost: float = 0.01

    def validate(self) -> "LatencyConfig":
        if self.hop_latency < 0 or self.match_cost < 0:
            raise InvalidConfig("latencies must be >= 0")
        return self


@dataclass(slots=True)
class SimEvent:
    fire_at: float
    dst: str
    payload: object
    seq: int = -1  # assigned by the kernel at schedule time


Handler = Callable[["SimKernel", SimEvent], None]


class SimKernel:
    def __init__(self, trace: Optional[TextIO] = None):
        self.now = 0.0
        self.scheduled = 0
        self.processed = 0
        self._queue: list[tuple[float, int, SimEvent]] = []
        self._next_seq = 0
        self._handlers: dict[str, Handler] = {}
        self._trace = trace

    def register(self, entity_id: str, handler: Handler) -> None:
        self._handlers[entity_id] = handler

    def schedule(self, event: SimEvent) -> None:
        """Enqueue an event; equal fire times are delivered in schedule order."""
        if event.fire_at < self.now:
            raise SchedulingInPast(f"fire_at {event.fire_at} < now {self.now}")
        event.seq = self._next_seq
        self._next_seq += 1
        self.scheduled += 1
        heapq.heappush(self._queue, (event.fire_at, event.seq, event))

    def send(self, dst: str, payload: object, delay: float = 0.0) -> None:
        self.schedule(SimEvent(fire_at=self.now + delay, dst=dst, payload=payload))

    def run_until_idle(self) -> float:
        """Dispatch events until the queue drains; returns the last fire time."""
        last = 0.0
        pop = heapq.heappop
        queue = self._queue
        handlers = self._handlers
        while queue:
            fire_at, _, event = pop(queue)
            self.now = fire_at
            last = fire_at
            self.processed += 1
            if self._trace is not None:
                kind = getattr(event.payload, "kind", type(event.payload).__name__)
                self._trace.write(f"t={fire_at:g} dst={event.dst} kind={kind}\n")
            handlers[event.dst](self, event)
        return last
