"""Geographic clustering used to gate selective monitoring."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List


@dataclass(frozen=True)
class Cluster:
    index: int
    members: FrozenSet[int]
    qualifies: bool = False


def cluster_partition(topology, l: int) -> List[Cluster]:
    """Split nodes into ceil(n/l) clusters of l geographically close nodes.

    Nodes are swept in horizontal strips (serpentine in x) and chunked in
    runs of ``l``; the last cluster takes the remainder.
    """
    if l < 3:
        raise ValueError("cluster size must be at least 3")
    nodes = list(topology.nodes)
    n = len(nodes)
    if n <= l:
        return [Cluster(0, frozenset(nodes))]
    k = math.ceil(n / l)
    strips = math.ceil(math.sqrt(k))
    strip_size = l * math.ceil(k / strips)
    pos = topology.positions
    by_y = sorted(nodes, key=lambda v: (pos[v][1], pos[v][0], v))
    ordered = []
    for s, start in enumerate(range(0, n, strip_size)):
        strip = sorted(by_y[start:start + strip_size], key=lambda v: (pos[v][0], pos[v][1], v))
        ordered.extend(reversed(strip) if s % 2 else strip)
    return [Cluster(i, frozenset(ordered[j:j + l])) for i, j in enumerate(range(0, n, l))]


def cluster_qualify(cluster: Cluster, suspects: Iterable) -> bool:
    for seg in suspects:
        if cluster.members.intersection((seg.prev, seg.node, seg.next)):
            return True
    return False


def cluster_of(clusters: Iterable[Cluster]) -> Dict[int, int]:
    return {v: c.index for c in clusters for v in c.members}
