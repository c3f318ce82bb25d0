"""Deterministic discrete-event engine and the line-oriented event trace."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, List, Optional

EVENT_KINDS = ("transmit", "deliver", "overhear", "timer")


class SchedulingError(ValueError):
    pass


@dataclass(order=True)
class Event:
    time: float
    sequence: int
    kind: str = field(compare=False)
    node: int = field(compare=False, default=-1)
    payload: Any = field(compare=False, default=None)
    src: int = field(compare=False, default=-1)


@dataclass(frozen=True)
class TraceRecord:
    time: float
    kind: str
    src: int
    dst: int
    ptype: str
    pid: object
    seq: object

    def format(self) -> str:
        return f"{self.time:.6f} {self.kind} {self.src} {self.dst} {self.ptype} {self.pid} {self.seq}"

    @classmethod
    def parse(cls, line: str) -> "TraceRecord":
        t, kind, src, dst, ptype, pid, seq = line.split()
        return cls(float(t), kind, int(src), int(dst), ptype, _maybe_int(pid), _maybe_int(seq))


def _maybe_int(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def format_trace(records: Iterable[TraceRecord]) -> str:
    return "".join(r.format() + "\n" for r in records)


def parse_trace(text: str) -> List[TraceRecord]:
    return [TraceRecord.parse(line) for line in text.splitlines() if line.strip()]


class Engine:
    """Single-threaded event loop ordered by (time, insertion sequence)."""

    def __init__(self, dispatch: Optional[Callable[[Event], None]] = None):
        self.now = 0.0
        self.dispatch = dispatch
        self.trace: List[TraceRecord] = []
        self.processed = 0
        self._queue: List[Event] = []
        self._counter = itertools.count()

    def schedule(self, time: float, kind: str, node: int = -1, payload: Any = None,
                 src: int = -1) -> Event:
        if kind not in EVENT_KINDS:
            raise SchedulingError(f"unknown event kind {kind!r}")
        if time < self.now:
            raise SchedulingError(f"event at t={time} is before now={self.now}")
        event = Event(time, next(self._counter), kind, node, payload, src)
        heapq.heappush(self._queue, event)
        return event

    def log(self, kind: str, src: int, dst: int, ptype="-", pid="-", seq="-") -> None:
        ptype = getattr(ptype, "value", ptype)
        self.trace.append(TraceRecord(self.now, kind, src, dst, str(ptype), pid, seq))

    @property
    def pending(self) -> int:
        return len(self._queue)

    def run(self, until: float) -> int:
        """Process every event with time <= until; return how many ran."""
        ran = 0
        queue = self._queue
        while queue and queue[0].time <= until:
            event = heapq.heappop(queue)
            self.now = event.time
            self.dispatch(event)
            ran += 1
        self.processed += ran
        return ran
