"""Baseline Watchdog: every forwarder listens for its next hop's retransmission."""

from __future__ import annotations

from typing import Dict, Optional, Set, Tuple

from ..packets import Packet, PacketType
from .base import IDS
from .monitor import AlarmReport, MonitorRecord

DEFAULT_FORWARD_TIMEOUT = 20.0
DEFAULT_ALARM_THRESHOLD = 0.20
DEFAULT_MIN_OBSERVATIONS = 20


def watchdog_on_entrust(record: MonitorRecord, packet: Packet, now: float,
                        forward_timeout: float) -> Optional[float]:
    """Start waiting for ``record.watched`` to forward ``packet``; return the deadline."""
    if record.watcher == packet.target or record.watched == packet.target:
        return None
    deadline = now + forward_timeout
    if not record.entrust(packet.pid, now, deadline):
        return None
    return deadline


def watchdog_on_overhear(record: MonitorRecord, packet: Packet) -> bool:
    return record.overheard(packet.pid)


def watchdog_check_alarm(record: MonitorRecord, now: float, *,
                         threshold: float = DEFAULT_ALARM_THRESHOLD,
                         min_observations: int = DEFAULT_MIN_OBSERVATIONS,
                         clock_origin: float = 0.0) -> Optional[AlarmReport]:
    record.expire_due(now)
    if record.entrusted < min_observations:
        return None
    loss = record.loss_fraction
    if loss <= threshold:
        return None
    return AlarmReport(record.watched, round(loss * 100, 2), now - clock_origin, "watchdog",
                       watcher=record.watcher, time=now, threshold=threshold)


class Watchdog(IDS):
    scheme = "watchdog"

    def __init__(self, host=None, *, forward_timeout: float = DEFAULT_FORWARD_TIMEOUT,
                 alarm_threshold: float = DEFAULT_ALARM_THRESHOLD,
                 min_observations: int = DEFAULT_MIN_OBSERVATIONS):
        super().__init__(host)
        self.forward_timeout = forward_timeout
        self.alarm_threshold = alarm_threshold
        self.min_observations = min_observations
        self.records: Dict[Tuple[int, int], MonitorRecord] = {}
        self.accused: Set[int] = set()

    def record(self, watcher: int, watched: int) -> MonitorRecord:
        key = (watcher, watched)
        rec = self.records.get(key)
        if rec is None:
            rec = self.records[key] = MonitorRecord(watcher, watched)
        return rec

    def on_transmit(self, sender, packet, next_hop):
        if packet.ptype is not PacketType.DATA or next_hop == packet.target:
            return
        if sender == packet.target or next_hop in self.accused:
            return
        host = self.host
        rec = self.record(sender, next_hop)
        deadline = watchdog_on_entrust(rec, packet, host.now, self.forward_timeout)
        if deadline is None:
            return
        host.count_listen(sender, next_hop, packet)
        host.schedule_timer(deadline, ("wd", sender, next_hop))

    def on_overhear(self, node, sender, packet):
        if packet.ptype is not PacketType.DATA:
            return
        rec = self.records.get((node, sender))
        if rec is not None:
            watchdog_on_overhear(rec, packet)

    def on_timer(self, tag):
        if tag[0] != "wd":
            return
        _, watcher, watched = tag
        rec = self.records.get((watcher, watched))
        if rec is None or watched in self.accused:
            return
        host = self.host
        alarm = watchdog_check_alarm(rec, host.now, threshold=self.alarm_threshold,
                                     min_observations=self.min_observations,
                                     clock_origin=host.clock_origin)
        if alarm is None:
            return
        self.accused.add(watched)
        for key in [k for k in self.records if k[1] == watched]:
            del self.records[key]
        self.alarms.append(alarm)
        host.raise_alarm(alarm)
