"""Promiscuous-listening ledger and alarm reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional


@dataclass
class MonitorRecord:
    """What ``watcher`` knows about packets it handed to ``watched``.

    ``pending`` maps packet id to forward deadline, in insertion order.
    Deadlines are appended in non-decreasing order, so expiry only ever
    needs to look at the front of the dict.
    """

    watcher: int
    watched: int
    entrusted: int = 0
    forwarded: int = 0
    expired: int = 0
    pending: Dict[int, float] = field(default_factory=dict)
    first_seen: Optional[float] = None

    def entrust(self, pid: int, now: float, deadline: float) -> bool:
        if pid in self.pending:
            return False
        if self.first_seen is None:
            self.first_seen = now
        self.pending[pid] = deadline
        self.entrusted += 1
        return True

    def overheard(self, pid: int) -> bool:
        if self.pending.pop(pid, None) is None:
            return False
        self.forwarded += 1
        return True

    def expire_due(self, now: float) -> int:
        n = 0
        for pid, deadline in list(self.pending.items()):
            if deadline > now:
                break
            del self.pending[pid]
            n += 1
        self.expired += n
        return n

    @property
    def matured(self) -> int:
        return self.entrusted - len(self.pending)

    @property
    def loss_fraction(self) -> float:
        if self.entrusted == 0:
            return 0.0
        return (self.entrusted - self.forwarded - len(self.pending)) / self.entrusted


@dataclass(frozen=True)
class AlarmReport:
    accused: int
    loss_fraction: float  # percent
    detection_time: float
    scheme: str
    watcher: int = -1
    time: float = 0.0
    threshold: float = 0.20


def format_alarm(alarm: AlarmReport) -> str:
    return (f"Alarm! node {alarm.accused} not forward more than {alarm.threshold * 100:g}% "
            f"packets: {alarm.loss_fraction:.2f}% loss, {alarm.detection_time:.2f} secs "
            f"from neighbour detection")
