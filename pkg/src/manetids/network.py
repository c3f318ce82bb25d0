"""Wires engine, medium, routing and IDS into one runnable scenario."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .config import ScenarioConfig, validate_config, ConfigError
from .engine import Engine, Event, TraceRecord
from .ids import IDS, NullIDS, SelectiveWatchdog, Watchdog, cluster_partition
from .ids.monitor import AlarmReport
from .medium import Medium, MediumConfig, Topology
from .packets import BROADCAST, Packet, PacketType
from .routing import (Discovery, NodeBehavior, Rebroadcast, Reply, RouteEntry, RouteReplyRecord,
                      RouteRequest, Router, select_route)


@dataclass
class Counters:
    sent: int = 0
    delivered: int = 0
    dropped_adversary: int = 0
    dropped_baseline: int = 0
    dropped_route: int = 0
    listen_events: int = 0


@dataclass
class SimulationResult:
    config: ScenarioConfig
    seed: int
    scheme: str
    trace: List[TraceRecord]
    alarms: List[AlarmReport]
    counters: Counters
    clock_origin: Optional[float]
    routes: List[Tuple[int, ...]]
    stalled: bool
    triggers: int = 0
    adversaries: Tuple[int, ...] = ()
    end_time: float = 0.0


def make_ids(config: ScenarioConfig, host=None) -> IDS:
    if config.ids_mode == "watchdog":
        return Watchdog(host, forward_timeout=config.forward_timeout,
                        alarm_threshold=config.alarm_threshold,
                        min_observations=config.min_observations)
    if config.ids_mode == "selective":
        return SelectiveWatchdog(host, slack=config.slack, tolerance=config.tolerance,
                                 min_observations=config.min_observations,
                                 ack_timeout=config.ack_timeout,
                                 segment_timeout=config.segment_timeout,
                                 alarm_threshold=config.alarm_threshold)
    return NullIDS(host)


class Network:
    """One simulation run. Owns every piece of mutable state."""

    def __init__(self, config: ScenarioConfig, seed: Optional[int] = None):
        problems = validate_config(config)
        if problems:
            raise ConfigError(problems)
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.engine = Engine(self._dispatch)
        self.topology = Topology(config.node_positions(), config.range)
        self.medium = Medium(self.engine, self.topology,
                             MediumConfig(config.range, config.per_hop_latency,
                                          config.baseline_loss), self.rng)
        bad = set(config.adversaries)
        self.routers: Dict[int, Router] = {
            n: Router(n, NodeBehavior.BLACK_HOLE if n in bad else NodeBehavior.HONEST,
                      config.forge_offset)
            for n in self.topology.nodes
        }
        self.clusters = cluster_partition(self.topology, config.cluster_size)
        self.flow_source = config.source
        self.flow_dest = config.destination
        self.interval = config.interval
        self.per_hop_latency = config.per_hop_latency

        self.counters = Counters()
        self.alarms: List[AlarmReport] = []
        self.queue: deque = deque()
        self.active_route: Optional[Tuple[int, ...]] = None
        self.entry: Optional[RouteEntry] = None
        self.discovery: Optional[Discovery] = None
        self.excluded: set = set()
        self.known_dest_seq = 0
        self.stalled = False
        self.clock_origin: Optional[float] = None
        self.routes: List[Tuple[int, ...]] = []
        self._bid = 0
        self._pid = 0

        self.ids = make_ids(config, self)

    # -- host services used by the IDS -------------------------------------------

    @property
    def now(self) -> float:
        return self.engine.now

    def new_pid(self) -> int:
        self._pid += 1
        return self._pid

    def dest_seq(self, node: int) -> int:
        return self.routers[node].seq

    def schedule_timer(self, time: float, tag) -> None:
        self.engine.schedule(time, "timer", payload=tag)

    def count_listen(self, watcher: int, watched: int, packet: Packet) -> None:
        self.counters.listen_events += 1
        self.engine.log("listen", watcher, watched, packet.ptype, packet.pid, packet.seq)

    def raise_alarm(self, alarm: AlarmReport) -> None:
        self.alarms.append(alarm)
        self.engine.log("alarm", alarm.watcher, alarm.accused)
        if alarm.accused not in (self.flow_source, self.flow_dest):
            self.exclude_and_rediscover(alarm.accused)

    # -- running ------------------------------------------------------------------

    def run(self, until: Optional[float] = None) -> SimulationResult:
        cfg = self.config
        if cfg.packets > 0:
            self.schedule_timer(cfg.start, ("cbr", 0))
        end = cfg.duration if until is None else until
        self.engine.run(end)
        return SimulationResult(
            config=cfg, seed=self.seed, scheme=self.ids.scheme, trace=self.engine.trace,
            alarms=list(self.alarms), counters=self.counters, clock_origin=self.clock_origin,
            routes=list(self.routes), stalled=self.stalled,
            triggers=getattr(self.ids, "triggers", 0), adversaries=tuple(cfg.adversaries),
            end_time=end)

    def _dispatch(self, event: Event) -> None:
        if event.kind == "deliver":
            self._on_deliver(event.node, event.payload, event.src)
        elif event.kind == "overhear":
            self._on_overhear(event.node, event.payload, event.src)
        elif event.kind == "timer":
            self._on_timer(event.payload)

    def _on_timer(self, tag) -> None:
        kind = tag[0]
        if kind == "cbr":
            self._generate(tag[1])
        elif kind == "disc_timeout":
            self._discovery_timeout(tag[1])
        elif kind == "reply_wait":
            disc = self.discovery
            if disc is not None and disc.broadcast_id == tag[1] and disc.selected is None:
                self._select(disc)
        else:
            self.ids.on_timer(tag)

    # -- traffic ------------------------------------------------------------------

    def _generate(self, k: int) -> None:
        cfg = self.config
        src, dst = self.flow_source, self.flow_dest
        pkt = Packet(PacketType.DATA, self.new_pid(), src, dst, seq=k, size=cfg.packet_size)
        self.counters.sent += 1
        self.engine.log("send", src, dst, pkt.ptype, pkt.pid, pkt.seq)
        if k + 1 < cfg.packets:
            self.schedule_timer(cfg.start + (k + 1) * cfg.interval, ("cbr", k + 1))
        if self.active_route is not None:
            self._send_from_source(pkt)
            return
        self.queue.append(pkt)
        if self.discovery is None or self.discovery.selected is not None:
            if not self.stalled:
                self.originate_discovery()

    def _send_from_source(self, pkt: Packet) -> None:
        pkt = pkt.evolve(route=self.active_route)
        self._forward(self.flow_source, pkt)
        self.ids.on_source_send(pkt)

    def _forward(self, node: int, pkt: Packet) -> None:
        """Hop-by-hop forwarding along the route carried in the packet."""
        reverse = pkt.ptype is PacketType.RREP
        nxt = pkt.next_on_route(node, reverse=reverse)
        if pkt.ptype is PacketType.RREP:
            pkt = pkt.evolve(hop_count=pkt.hop_count + 1)
        if nxt is None or not self.medium.transmit(node, pkt, nxt):
            if pkt.ptype is PacketType.DATA:
                self.counters.dropped_route += 1
                self.engine.log("drop-route", node, -1 if nxt is None else nxt,
                                pkt.ptype, pkt.pid, pkt.seq)
            return
        if pkt.ptype is PacketType.DATA:
            self.ids.on_transmit(node, pkt, nxt)

    def _on_deliver(self, node: int, pkt: Packet, sender: int) -> None:
        eng = self.engine
        eng.log("deliver", sender, node, pkt.ptype, pkt.pid, pkt.seq)
        router = self.routers[node]
        ptype = pkt.ptype
        if ptype is PacketType.RREQ:
            self._on_rreq(node, pkt)
        elif ptype is PacketType.RREP:
            self._observe_reply(router, pkt)
            if node == pkt.target:
                self._on_reply_at_source(pkt)
            elif not router.is_black_hole:
                self._forward(node, pkt)
        elif ptype is PacketType.DATA:
            if not self.medium.survives(pkt, node):
                self.counters.dropped_baseline += 1
                eng.log("drop-loss", sender, node, ptype, pkt.pid, pkt.seq)
            elif node == pkt.target:
                self.counters.delivered += 1
                eng.log("recv", pkt.origin, node, ptype, pkt.pid, pkt.seq)
                ack = self.ids.on_dest_data(node, pkt)
                if ack is not None:
                    self._forward(node, ack)
            elif router.is_black_hole:
                self.counters.dropped_adversary += 1
                eng.log("drop-adv", sender, node, ptype, pkt.pid, pkt.seq)
            else:
                self._forward(node, pkt)
        elif ptype is PacketType.ACK:
            if node == pkt.target:
                if pkt.body is not None:
                    self.known_dest_seq = max(self.known_dest_seq, pkt.body)
                self.ids.on_ack(node, pkt)
            elif not router.is_black_hole:
                self._forward(node, pkt)

    def _on_overhear(self, node: int, pkt: Packet, sender: int) -> None:
        self.engine.log("overhear", sender, node, pkt.ptype, pkt.pid, pkt.seq)
        if pkt.ptype is PacketType.DATA:
            self.ids.on_overhear(node, sender, pkt)
        elif pkt.ptype is PacketType.RREP:
            self._observe_reply(self.routers[node], pkt)

    @staticmethod
    def _observe_reply(router: Router, pkt: Packet) -> None:
        # adversaries track fresh sequence numbers the real destination hands out
        if router.is_black_hole and pkt.route and pkt.origin == pkt.route[-1]:
            router.observe_dest_seq(pkt.seq)

    # -- route discovery ----------------------------------------------------------

    def originate_discovery(self, attempt: int = 0) -> int:
        cfg = self.config
        src = self.flow_source
        self._bid += 1
        bid = self._bid
        self.discovery = Discovery(bid, self.flow_dest, self.now, frozenset(self.excluded), attempt)
        router = self.routers[src]
        router.seen.add((src, bid))
        rreq = RouteRequest(src, self.flow_dest, bid, 0, router.next_seq(), self.known_dest_seq,
                            (src,), frozenset(self.excluded))
        pkt = Packet(PacketType.RREQ, self.new_pid(), src, self.flow_dest, seq=bid, body=rreq)
        self.medium.transmit(src, pkt, BROADCAST)
        self.schedule_timer(self.now + cfg.discovery_timeout, ("disc_timeout", bid))
        return bid

    def _on_rreq(self, node: int, pkt: Packet) -> None:
        router = self.routers[node]
        action = router.handle_rreq(pkt.body)
        if isinstance(action, Rebroadcast):
            out = Packet(PacketType.RREQ, self.new_pid(), pkt.origin, pkt.target,
                         seq=pkt.seq, hop_count=action.rreq.hop_count, body=action.rreq)
            self.medium.transmit(node, out, BROADCAST)
        elif isinstance(action, Reply):
            rec = action.record
            rrep = Packet(PacketType.RREP, self.new_pid(), node, pkt.origin, seq=rec.dest_seq,
                          hop_count=rec.hop_count, route=rec.route, body=pkt.body.broadcast_id)
            self._forward(node, rrep)

    def _on_reply_at_source(self, pkt: Packet) -> None:
        disc = self.discovery
        if disc is None or pkt.body != disc.broadcast_id:
            return
        record = RouteReplyRecord(pkt.origin, pkt.seq, pkt.hop_count, pkt.route)
        if not disc.accept(record):
            return
        if record.replier == self.flow_dest:
            self.known_dest_seq = max(self.known_dest_seq, record.dest_seq)
        if disc.selected is None and not disc.collecting:
            disc.collecting = True
            self.schedule_timer(self.now + self.config.reply_wait,
                                ("reply_wait", disc.broadcast_id))

    def _select(self, disc: Discovery) -> None:
        entry = select_route(disc.cache)
        disc.selected = entry
        self.entry = entry
        self.active_route = entry.route
        self.routes.append(entry.route)
        if self.clock_origin is None:
            self.clock_origin = self.now
        self.ids.on_route_selected(entry, disc)
        while self.queue and self.active_route is not None:
            self._send_from_source(self.queue.popleft())

    def _discovery_timeout(self, bid: int) -> None:
        disc = self.discovery
        if disc is None or disc.broadcast_id != bid or disc.selected is not None:
            return
        if disc.cache:
            self._select(disc)
        elif disc.attempt < self.config.discovery_retries:
            self.originate_discovery(disc.attempt + 1)
        else:
            self.stalled = True
            self.engine.log("stall", self.flow_source, self.flow_dest)

    def exclude_and_rediscover(self, accused: int) -> int:
        if accused in (self.flow_source, self.flow_dest):
            raise ValueError("flow endpoints are trusted and cannot be excluded")
        self.excluded.add(accused)
        self.active_route = None
        self.entry = None
        return self.originate_discovery()


def simulate(config: ScenarioConfig, seed: Optional[int] = None) -> SimulationResult:
    return Network(config, seed).run()
