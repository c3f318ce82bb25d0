"""AODV-lite route discovery and the black-hole adversary.

Only the pieces needed for single-flow discovery are modelled: a flooded
RREQ, RREPs unicast back along the reverse path, destination sequence
numbers and a source-side reply cache. Data packets carry the route the
source selected, so a forged route cannot linger in intermediate tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

DEFAULT_FORGE_OFFSET = 4096


class NodeBehavior(str, Enum):
    HONEST = "honest"
    BLACK_HOLE = "blackhole"


class NoRoute(LookupError):
    pass


@dataclass(frozen=True)
class RouteRequest:
    origin: int
    target: int
    broadcast_id: int
    hop_count: int = 0
    origin_seq: int = 0
    dest_seq_known: int = 0
    path: Tuple[int, ...] = ()
    avoid: FrozenSet[int] = frozenset()

    def rebroadcast_by(self, node: int) -> "RouteRequest":
        return RouteRequest(self.origin, self.target, self.broadcast_id, self.hop_count + 1,
                            self.origin_seq, self.dest_seq_known, self.path + (node,),
                            self.avoid)


@dataclass(frozen=True)
class RouteReplyRecord:
    replier: int
    dest_seq: int
    hop_count: int
    route: Tuple[int, ...]

    def __post_init__(self):
        if self.replier not in self.route:
            raise ValueError("replier must lie on its route")

    def neighbours_of(self, node: int) -> Tuple[int, int]:
        """(prev, next) around ``node``; route ends stand in at the edges."""
        i = self.route.index(node)
        prev = self.route[i - 1] if i > 0 else self.route[0]
        nxt = self.route[i + 1] if i + 1 < len(self.route) else self.route[-1]
        return prev, nxt


@dataclass(frozen=True)
class RouteEntry:
    destination: int
    next_hop: int
    dest_seq: int
    hop_count: int
    route: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Rebroadcast:
    rreq: RouteRequest


@dataclass(frozen=True)
class Reply:
    record: RouteReplyRecord
    forged: bool = False


Action = Union[Rebroadcast, Reply, None]


def forged_sequence(highest_observed: Optional[int], offset: int = DEFAULT_FORGE_OFFSET) -> int:
    return (highest_observed or 0) + offset


class Router:
    """Per-node routing state."""

    def __init__(self, node: int, behavior: NodeBehavior = NodeBehavior.HONEST,
                 forge_offset: int = DEFAULT_FORGE_OFFSET):
        self.node = node
        self.behavior = behavior
        self.forge_offset = forge_offset
        self.seq = 0
        self.seen: set = set()
        self.highest_observed: Optional[int] = None

    @property
    def is_black_hole(self) -> bool:
        return self.behavior is NodeBehavior.BLACK_HOLE

    def observe_dest_seq(self, seq: int) -> None:
        if self.highest_observed is None or seq > self.highest_observed:
            self.highest_observed = seq

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def handle_rreq(self, rreq: RouteRequest) -> Action:
        key = (rreq.origin, rreq.broadcast_id)
        if key in self.seen or rreq.origin == self.node:
            return None
        if not self.is_black_hole and rreq.avoid.intersection(rreq.path + (self.node,)):
            # the source blacklisted a node on this copy; wait for a cleaner one
            return None
        self.seen.add(key)
        path = rreq.path + (self.node,)
        if self.is_black_hole:
            self.observe_dest_seq(rreq.dest_seq_known)
            seq = forged_sequence(self.highest_observed, self.forge_offset)
            route = path + (rreq.target,)
            return Reply(RouteReplyRecord(self.node, seq, 1, route), forged=True)
        if self.node == rreq.target:
            return Reply(RouteReplyRecord(self.node, self.next_seq(), 0, path))
        return Rebroadcast(rreq.rebroadcast_by(self.node))


def select_route(cache: Sequence[RouteReplyRecord]) -> RouteEntry:
    """Freshest reply wins; ties go to fewer hops, then the lower replier id."""
    if not cache:
        raise NoRoute("no route reply cached")
    best = min(cache, key=lambda r: (-r.dest_seq, r.hop_count, r.replier))
    return RouteEntry(best.route[-1], best.route[1], best.dest_seq, best.hop_count, best.route)


@dataclass
class Discovery:
    """Source-side state for one broadcast id."""

    broadcast_id: int
    target: int
    started: float
    excluded: FrozenSet[int] = frozenset()
    attempt: int = 0
    cache: List[RouteReplyRecord] = field(default_factory=list)
    selected: Optional[RouteEntry] = None
    collecting: bool = False

    def accept(self, record: RouteReplyRecord) -> bool:
        """Cache a reply unless its route touches an excluded node."""
        if self.excluded.intersection(record.route):
            return False
        self.cache.append(record)
        return True


def route_avoids(route: Iterable[int], excluded: Iterable[int]) -> bool:
    return not set(excluded).intersection(route)
