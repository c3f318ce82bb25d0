"""Packet model shared by the medium, routing and IDS layers."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Tuple


class PacketType(str, Enum):
    RREQ = "RREQ"
    RREP = "RREP"
    DATA = "DATA"
    ACK = "ACK"


BROADCAST = -1


@dataclass(frozen=True)
class Packet:
    """One network unit.

    ``seq`` is the number shown in the trace: broadcast id for RREQ,
    destination sequence number for RREP, CBR sequence for DATA and the
    acknowledged data count for ACK. ``route`` is the full origin-to-target
    node list carried by RREP, DATA and ACK packets.
    """

    ptype: PacketType
    pid: int
    origin: int
    target: int
    seq: int = 0
    hop_count: int = 0
    size: int = 64
    route: Tuple[int, ...] = ()
    body: Any = None

    def evolve(self, **changes) -> "Packet":
        return replace(self, **changes)

    def next_on_route(self, node: int, reverse: bool = False):
        """Neighbour after ``node`` on the carried route, or None at the end."""
        path = self.route[::-1] if reverse else self.route
        try:
            i = path.index(node)
        except ValueError:
            return None
        return path[i + 1] if i + 1 < len(path) else None
