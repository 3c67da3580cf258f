"""
Discrete-event engine: integer-µs virtual clock, heap-ordered event queue,
seeded randomness and the run loop. Single-threaded by contract; one engine
instance per run.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Set, Tuple

import numpy as np

from .errors import SchedulingInPast
from .models import BROADCAST, Event, EventKind, SimTime

logger = logging.getLogger(__name__)

Handler = Callable[[SimTime, int], None]


@dataclass(frozen=True)
class EventHandle:
    seq: int
    event: Event


class Engine:
    def __init__(self, seed: int = 0, record: bool = False) -> None:
        self.clock: SimTime = 0
        self.seed = seed
        # Only randomness source for a run; CBR scenarios never draw from it.
        self.rng = np.random.default_rng(seed)
        self._heap: List[Tuple[SimTime, int, EventKind, int]] = []
        self._next_seq = 0
        self._pending: Set[int] = set()
        self._cancelled: Set[int] = set()
        self._handlers: Dict[EventKind, Handler] = {}
        self.processed = 0
        self.record = record
        self.event_log: List[Tuple[SimTime, str, int]] = []

    def __len__(self) -> int:
        return len(self._heap) - len(self._cancelled)

    def on(self, kind: EventKind, handler: Handler) -> None:
        """Register `handler(fire_at, subject)` for one event kind."""
        self._handlers[kind] = handler

    def push(self, fire_at: SimTime, kind: EventKind, subject: int = BROADCAST) -> int:
        """Hot-path schedule for handlers; returns the event's sequence number."""
        if fire_at < self.clock:
            raise SchedulingInPast(fire_at, self.clock)
        seq = self._next_seq
        self._next_seq = seq + 1
        heapq.heappush(self._heap, (fire_at, seq, kind, subject))
        return seq

    def schedule(self, event: Event) -> EventHandle:
        seq = self.push(event.fire_at, event.kind, event.subject)
        self._pending.add(seq)
        return EventHandle(seq, event)

    def schedule_at(self, fire_at: SimTime, kind: EventKind, subject: int = BROADCAST) -> EventHandle:
        return self.schedule(Event(fire_at, kind, subject))

    def cancel(self, handle: EventHandle) -> bool:
        """Cancel a still-pending event; a fired or already cancelled handle is a no-op."""
        if handle.seq not in self._pending:
            return False
        self._pending.discard(handle.seq)
        self._cancelled.add(handle.seq)
        return True

    def peek_time(self) -> Optional[SimTime]:
        while self._heap and self._heap[0][1] in self._cancelled:
            _, seq, _, _ = heapq.heappop(self._heap)
            self._cancelled.discard(seq)
        return self._heap[0][0] if self._heap else None

    def run(self, until: SimTime) -> int:
        """Process every event with fire_at <= until; leave the clock at until."""
        if until < self.clock:
            raise SchedulingInPast(until, self.clock)
        heap = self._heap
        pending = self._pending
        cancelled = self._cancelled
        handlers = self._handlers
        pop = heapq.heappop
        record = self.record
        count = 0
        while heap and heap[0][0] <= until:
            fire_at, seq, kind, subject = pop(heap)
            if cancelled and seq in cancelled:
                cancelled.discard(seq)
                continue
            if pending:
                pending.discard(seq)
            self.clock = fire_at
            if record:
                self.event_log.append((fire_at, kind.value, subject))
            handler = handlers.get(kind)
            if handler is not None:
                handler(fire_at, subject)
            count += 1
        self.clock = until
        self.processed += count
        logger.debug("engine advanced to %d us after %d events", until, count)
        return count
