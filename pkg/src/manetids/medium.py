"""Unit-disk wireless medium with addressed delivery and promiscuous overhearing."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from .engine import Engine
from .packets import BROADCAST, Packet, PacketType

Position = Tuple[float, float]


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class MediumConfig:
    range: float = 250.0
    per_hop_latency: float = 0.002
    baseline_loss: float = 0.003

    def __post_init__(self):
        if self.range <= 0:
            raise ValueError("range must be positive")
        if not 0.0 <= self.baseline_loss < 1.0:
            raise ValueError("baseline_loss must lie in [0, 1)")
        if self.per_hop_latency < 0:
            raise ValueError("per_hop_latency must be non-negative")


class Topology:
    """Static node placement; adjacency is the unit-disk graph of ``range``."""

    def __init__(self, positions: Mapping[int, Position], range: float):
        self.positions: Dict[int, Position] = {int(k): (float(x), float(y))
                                               for k, (x, y) in positions.items()}
        self.range = float(range)
        ids = sorted(self.positions)
        adj = {i: set() for i in ids}
        for a_idx, a in enumerate(ids):
            ax, ay = self.positions[a]
            for b in ids[a_idx + 1:]:
                bx, by = self.positions[b]
                if math.hypot(ax - bx, ay - by) <= self.range:
                    adj[a].add(b)
                    adj[b].add(a)
        self._adj: Dict[int, FrozenSet[int]] = {k: frozenset(v) for k, v in adj.items()}
        # sorted copies keep event insertion order independent of set hashing
        self._sorted: Dict[int, Tuple[int, ...]] = {k: tuple(sorted(v)) for k, v in adj.items()}

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(sorted(self.positions))

    def __len__(self):
        return len(self.positions)

    def __contains__(self, node):
        return node in self.positions

    def neighbors(self, node: int) -> FrozenSet[int]:
        try:
            return self._adj[node]
        except KeyError:
            raise UnknownNode(node) from None

    def sorted_neighbors(self, node: int) -> Tuple[int, ...]:
        try:
            return self._sorted[node]
        except KeyError:
            raise UnknownNode(node) from None

    def is_connected(self, exclude: Iterable[int] = ()) -> bool:
        skip = set(exclude)
        nodes = [n for n in self.nodes if n not in skip]
        if not nodes:
            return True
        return len(self.reachable(nodes[0], exclude=skip)) == len(nodes)

    def reachable(self, start: int, exclude: Iterable[int] = ()) -> set:
        skip = set(exclude)
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self._adj[u]:
                if v not in seen and v not in skip:
                    seen.add(v)
                    stack.append(v)
        return seen

    def hop_distance(self, a: int, b: int, exclude: Iterable[int] = ()):
        """BFS hop count from a to b avoiding ``exclude``; None if unreachable."""
        skip = set(exclude)
        frontier, dist = [a], {a: 0}
        while frontier:
            nxt = []
            for u in frontier:
                if u == b:
                    return dist[u]
                for v in self._sorted[u]:
                    if v not in dist and v not in skip:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        return None


def neighbors(topology: Topology, node: int) -> FrozenSet[int]:
    return topology.neighbors(node)


class Medium:
    """Schedules deliver/overhear events for a transmission.

    Baseline loss is drawn once per data packet when it reaches its final
    destination, so that the configured probability is the end-to-end drop
    rate of an honest flow regardless of its hop count.
    """

    def __init__(self, engine: Engine, topology: Topology, config: MediumConfig,
                 rng: random.Random):
        self.engine = engine
        self.topology = topology
        self.config = config
        self.rng = rng

    def transmit(self, sender: int, packet: Packet, next_hop: int) -> bool:
        """Put ``packet`` on the air; False when a unicast next hop is out of range."""
        topo = self.topology
        nbrs = topo.sorted_neighbors(sender)
        if next_hop != BROADCAST and next_hop not in topo.neighbors(sender):
            return False
        eng = self.engine
        eng.log("transmit", sender, next_hop, packet.ptype, packet.pid, packet.seq)
        at = eng.now + self.config.per_hop_latency
        for n in nbrs:
            if next_hop == BROADCAST or n == next_hop:
                eng.schedule(at, "deliver", n, packet, sender)
            else:
                eng.schedule(at, "overhear", n, packet, sender)
        return True

    def survives(self, packet: Packet, receiver: int) -> bool:
        if (packet.ptype is PacketType.DATA and receiver == packet.target
                and self.config.baseline_loss > 0.0):
            return self.rng.random() >= self.config.baseline_loss
        return True
