"""Selective Watchdog.

Monitoring stays off while the destination keeps acknowledging every tenth
data packet. A missing acknowledgement triggers one detection episode: the
route replies whose sequence number exceeds the dynamic threshold become
suspects, each suspect is wrapped in a (prev, node, next) segment, and only
the segment's watchers inside qualifying clusters listen promiscuously until
the segment yields a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..packets import Packet, PacketType
from ..routing import RouteReplyRecord
from .base import IDS
from .clusters import cluster_of, cluster_qualify
from .monitor import AlarmReport, MonitorRecord

ACK_EVERY = 10
DEFAULT_SLACK = 10
DEFAULT_TOLERANCE = 0.05
DEFAULT_MIN_OBSERVATIONS = 20

DEFERRED = "deferred"


@dataclass(frozen=True)
class ThresholdState:
    current: int = DEFAULT_SLACK
    slack: int = DEFAULT_SLACK
    last_authenticated: int = 0


def update_threshold(state: ThresholdState, observed_dest_seq: int) -> ThresholdState:
    last = max(state.last_authenticated, observed_dest_seq)
    return ThresholdState(last + state.slack, state.slack, last)


@dataclass(frozen=True)
class Segment:
    prev: int
    node: int
    next: int

    @property
    def nodes(self) -> Tuple[int, int, int]:
        return (self.prev, self.node, self.next)


def build_suspect_list(cache: Sequence[RouteReplyRecord], threshold: int,
                       route: Sequence[int]) -> List[Segment]:
    """Segments around every replier whose sequence number beats ``threshold``.

    Repliers on the active route come first in route order; any others
    follow by id.
    """
    suspects: Dict[int, Segment] = {}
    for rec in cache:
        if rec.dest_seq > threshold and rec.replier not in suspects:
            prev, nxt = rec.neighbours_of(rec.replier)
            suspects[rec.replier] = Segment(prev, rec.replier, nxt)
    position = {v: i for i, v in enumerate(route)}
    order = sorted(suspects, key=lambda v: (v not in position, position.get(v, 0), v))
    return [suspects[v] for v in order]


def fallback_segments(route: Sequence[int]) -> List[Segment]:
    return [Segment(route[i - 1], route[i], route[i + 1]) for i in range(1, len(route) - 1)]


def segmented_watchdog(segment: Segment, counters: Mapping[int, Tuple[int, int]], *,
                       tolerance: float = DEFAULT_TOLERANCE,
                       min_observations: int = DEFAULT_MIN_OBSERVATIONS,
                       trusted: Iterable[int] = ()):
    """Check the suspect, then its successor, then its predecessor.

    ``counters`` maps node -> (received, forwarded). A node is the dropper
    when it forwards fewer than ``received * (1 - tolerance)``. Returns the
    first dropper, None when every observed node is clean, or DEFERRED
    while a node earlier in the order still lacks observations.
    """
    skip = set(trusted)
    checked = []
    for node in (segment.node, segment.next, segment.prev):
        if node in skip or node in checked or node not in counters:
            continue
        checked.append(node)
        received, forwarded = counters[node]
        if received < min_observations:
            return DEFERRED
        if forwarded < received * (1.0 - tolerance):
            return node
    return None


def dest_ack_emit(dest: int, source: int, data_count: int, route: Sequence[int],
                  pid: int, dest_seq: int = 0) -> Optional[Packet]:
    if data_count <= 0 or data_count % ACK_EVERY:
        return None
    back = tuple(reversed(route)) if route else (dest, source)
    return Packet(PacketType.ACK, pid, dest, source, seq=data_count, route=back, body=dest_seq)


def default_ack_timeout(interval: float, hops: int, per_hop_latency: float) -> float:
    return 2.0 * (ACK_EVERY * interval + 2 * hops * per_hop_latency)


class SelectiveWatchdog(IDS):
    scheme = "selective"

    def __init__(self, host=None, *, slack: int = DEFAULT_SLACK,
                 tolerance: float = DEFAULT_TOLERANCE,
                 min_observations: int = DEFAULT_MIN_OBSERVATIONS,
                 ack_timeout: Optional[float] = None,
                 segment_timeout: Optional[float] = None,
                 alarm_threshold: float = 0.20):
        super().__init__(host)
        self.tolerance = tolerance
        self.min_observations = min_observations
        self.ack_timeout = ack_timeout
        self.segment_timeout = segment_timeout
        self.alarm_threshold = alarm_threshold
        self.threshold = ThresholdState(slack, slack, 0)

        self.sent = 0
        self.window_ends: List[float] = []
        self.last_ack: Optional[float] = None
        self.episode_open = False
        self.triggers = 0
        self.trigger_times: List[float] = []

        self.dest_count = 0
        self.queue: List[Segment] = []
        self.segment: Optional[Segment] = None
        self.records: Dict[Tuple[int, int], MonitorRecord] = {}
        self.generation = 0
        self.verdicts: List[Tuple[Segment, object]] = []

    # -- acknowledgement handling -------------------------------------------------

    def current_ack_timeout(self) -> float:
        if self.ack_timeout is not None:
            return self.ack_timeout
        host = self.host
        route = host.active_route or ()
        hops = max(len(route) - 1, 1)
        return default_ack_timeout(host.interval, hops, host.per_hop_latency)

    def on_dest_data(self, dest, packet):
        self.dest_count += 1
        host = self.host
        return dest_ack_emit(dest, packet.origin, self.dest_count, packet.route,
                             host.new_pid(), host.dest_seq(dest))

    def on_ack(self, source, packet):
        host = self.host
        self.last_ack = host.now
        self.episode_open = False
        if packet.body is not None:
            self.threshold = update_threshold(self.threshold, packet.body)

    def on_source_send(self, packet):
        self.sent += 1
        if self.sent % ACK_EVERY:
            return
        host = self.host
        self.window_ends.append(host.now)
        k = len(self.window_ends)
        host.schedule_timer(host.now + self.current_ack_timeout(), ("ack", k))

    def _window_acknowledged(self, k: int) -> bool:
        if self.last_ack is None:
            return False
        since = self.window_ends[k - 2] if k >= 2 else -math.inf
        return self.last_ack > since

    def source_ack_watch(self, k: int) -> bool:
        """Deadline check for window ``k``; True when it opens a new episode."""
        if self._window_acknowledged(k) or self.episode_open:
            return False
        self.episode_open = True
        self.triggers += 1
        return True

    # -- route bookkeeping --------------------------------------------------------

    def on_route_selected(self, entry, discovery):
        host = self.host
        authentic = [r.dest_seq for r in discovery.cache if r.replier == host.flow_dest]
        if authentic:
            self.threshold = update_threshold(self.threshold, max(authentic))
        self._stop_monitoring(clear_queue=True)

    # -- segment monitoring -------------------------------------------------------

    def _trigger(self):
        host = self.host
        route = host.active_route
        if not route or self.segment is not None:
            return
        segments = build_suspect_list(host.discovery.cache, self.threshold.current, route)
        if not segments:
            segments = fallback_segments(route)
        self.queue = list(segments)
        self._next_segment()

    def _next_segment(self):
        host = self.host
        route = host.active_route or ()
        trusted = {host.flow_source, host.flow_dest}
        while self.queue:
            seg = self.queue.pop(0)
            self.generation += 1
            clusters = host.clusters
            qualifying = {c.index for c in clusters if cluster_qualify(c, [seg])}
            where = cluster_of(clusters)
            records = {}
            for node in (seg.node, seg.next, seg.prev):
                if node in trusted or node not in route:
                    continue
                idx = route.index(node)
                if idx == 0:
                    continue
                watcher = route[idx - 1]
                if where.get(watcher) in qualifying and (watcher, node) not in records:
                    records[(watcher, node)] = MonitorRecord(watcher, node)
            if records:
                self.segment = seg
                self.records = records
                return
            self.verdicts.append((seg, None))
        self.segment = None
        self.records = {}

    def _stop_monitoring(self, clear_queue: bool):
        self.segment = None
        self.records = {}
        self.generation += 1
        if clear_queue:
            self.queue = []

    def _timeout(self) -> float:
        return self.segment_timeout if self.segment_timeout is not None else self.current_ack_timeout()

    def on_transmit(self, sender, packet, next_hop):
        if self.segment is None or packet.ptype is not PacketType.DATA:
            return
        rec = self.records.get((sender, next_hop))
        if rec is None:
            return
        host = self.host
        deadline = host.now + self._timeout()
        if rec.entrust(packet.pid, host.now, deadline):
            host.count_listen(sender, next_hop, packet)
            host.schedule_timer(deadline, ("seg", self.generation, sender, next_hop))

    def on_overhear(self, node, sender, packet):
        if self.segment is None or packet.ptype is not PacketType.DATA:
            return
        rec = self.records.get((node, sender))
        if rec is not None and rec.overheard(packet.pid):
            self._evaluate()

    def on_timer(self, tag):
        kind = tag[0]
        if kind == "ack":
            if self.source_ack_watch(tag[1]):
                host = self.host
                host.engine.log("trigger", host.flow_source, host.flow_dest, seq=tag[1])
                self.trigger_times.append(host.now)
                self._trigger()
        elif kind == "seg":
            _, gen, watcher, watched = tag
            rec = self.records.get((watcher, watched))
            if gen != self.generation or rec is None:
                return
            if rec.expire_due(self.host.now):
                self._evaluate()

    def counters(self) -> Dict[int, Tuple[int, int]]:
        return {rec.watched: (rec.matured, rec.forwarded) for rec in self.records.values()}

    def _evaluate(self):
        seg = self.segment
        host = self.host
        verdict = segmented_watchdog(seg, self.counters(), tolerance=self.tolerance,
                                     min_observations=self.min_observations,
                                     trusted=(host.flow_source, host.flow_dest))
        if verdict is DEFERRED:
            return
        self.verdicts.append((seg, verdict))
        if verdict is None:
            self._stop_monitoring(clear_queue=False)
            self._next_segment()
            return
        rec = next(r for r in self.records.values() if r.watched == verdict)
        loss = (rec.matured - rec.forwarded) / rec.matured if rec.matured else 0.0
        alarm = AlarmReport(verdict, round(loss * 100, 2), host.now - host.clock_origin,
                            "selective", watcher=rec.watcher, time=host.now,
                            threshold=self.alarm_threshold)
        self._stop_monitoring(clear_queue=True)
        self.alarms.append(alarm)
        host.raise_alarm(alarm)
