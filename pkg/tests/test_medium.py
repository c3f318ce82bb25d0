import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from manetids.engine import Engine
from manetids.medium import Medium, MediumConfig, Topology, UnknownNode, neighbors
from manetids.network import simulate
from manetids.packets import BROADCAST, Packet, PacketType

from conftest import chain


def test_collinear_middle_sees_both_ends():
    topo = Topology({0: (0, 0), 1: (200, 0), 2: (400, 0)}, 250)
    assert neighbors(topo, 1) == {0, 2}
    assert neighbors(topo, 0) == {1}
    assert 2 not in neighbors(topo, 0)


def test_single_node_has_no_neighbours():
    assert neighbors(Topology({0: (5, 5)}, 100), 0) == set()


def test_unknown_node_is_an_error():
    with pytest.raises(UnknownNode):
        neighbors(Topology({0: (0, 0)}, 10), 7)


coords = st.floats(min_value=0, max_value=500, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coords, coords), min_size=1, max_size=15),
       st.floats(min_value=1, max_value=400))
def test_neighbour_relation_matches_pairwise_distance(points, rng):
    topo = Topology(dict(enumerate(points)), rng)
    for a, pa in enumerate(points):
        for b, pb in enumerate(points):
            expected = a != b and math.dist(pa, pb) <= rng
            assert (b in topo.neighbors(a)) == expected
            assert (a in topo.neighbors(b)) == (b in topo.neighbors(a))


def _medium(positions, range_=120.0, loss=0.0):
    events = []
    eng = Engine(events.append)
    topo = Topology(positions, range_)
    return Medium(eng, topo, MediumConfig(range_, 0.002, loss), random.Random(0)), events


def _data(pid=1, target=9):
    return Packet(PacketType.DATA, pid, 0, target, seq=pid)


def test_chain_transmit_reaches_only_next_hop():
    med, events = _medium({0: (0, 0), 1: (100, 0), 2: (200, 0)})
    assert med.transmit(0, _data(), 1)
    med.engine.run(1.0)
    assert [(e.kind, e.node) for e in events] == [("deliver", 1)]
    assert events[0].time == pytest.approx(0.002)


def test_star_transmit_overheard_by_other_leaves():
    med, events = _medium({0: (0, 0), 1: (100, 0), 2: (0, 100), 3: (-100, 0)})
    med.transmit(0, _data(), 1)
    med.engine.run(1.0)
    assert sorted((e.kind, e.node) for e in events) == [
        ("deliver", 1), ("overhear", 2), ("overhear", 3)]


def test_broadcast_delivers_to_every_neighbour():
    med, events = _medium({0: (0, 0), 1: (100, 0), 2: (0, 100), 3: (300, 300)})
    med.transmit(0, Packet(PacketType.RREQ, 1, 0, 3), BROADCAST)
    med.engine.run(1.0)
    assert sorted((e.kind, e.node) for e in events) == [("deliver", 1), ("deliver", 2)]


def test_unicast_to_non_neighbour_is_refused():
    med, events = _medium({0: (0, 0), 1: (100, 0), 2: (200, 0)})
    assert med.transmit(0, _data(), 2) is False
    med.engine.run(1.0)
    assert events == [] and med.engine.trace == []


def test_honest_chain_conserves_every_packet():
    result = simulate(chain(4, packets=1000, baseline_loss=0.0))
    kinds = [(r.kind, r.ptype) for r in result.trace]
    sent = kinds.count(("send", "DATA"))
    received = kinds.count(("recv", "DATA"))
    drops = sum(1 for k, p in kinds if k.startswith("drop") and p == "DATA")
    assert (sent, received, drops) == (1000, 1000, 0)


def test_baseline_loss_is_seeded():
    cfg = chain(4, packets=2000, baseline_loss=0.05)
    a, b = simulate(cfg, 7), simulate(cfg, 7)
    assert a.counters == b.counters
    assert 0 < a.counters.dropped_baseline < 200
