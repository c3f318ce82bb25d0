import itertools

import pytest
from hypothesis import given, settings, strategies as st

from manetids.config import ScenarioConfig
from manetids.medium import Topology
from manetids.network import Network, simulate
from manetids.routing import (NodeBehavior, NoRoute, Rebroadcast, Reply, RouteReplyRecord,
                              RouteRequest, Router, forged_sequence, route_avoids, select_route)

from conftest import chain


# -- per-node RREQ handling ---------------------------------------------------------


def test_destination_answers_with_incremented_sequence():
    dest = Router(6)
    dest.seq = 4
    action = dest.handle_rreq(RouteRequest(0, 6, 1, path=(0, 1)))
    assert isinstance(action, Reply) and not action.forged
    assert action.record == RouteReplyRecord(6, 5, 0, (0, 1, 6))


def test_black_hole_forges_sequence_and_single_hop():
    bh = Router(3, NodeBehavior.BLACK_HOLE)
    action = bh.handle_rreq(RouteRequest(0, 6, 1, dest_seq_known=17, path=(0,)))
    assert action.forged
    assert action.record.dest_seq == 17 + 4096 == 4113
    assert action.record.hop_count == 1
    assert action.record.route == (0, 3, 6)


def test_intermediate_rebroadcasts_once():
    r = Router(2)
    rreq = RouteRequest(0, 6, 9, path=(0, 1))
    first = r.handle_rreq(rreq)
    assert isinstance(first, Rebroadcast)
    assert first.rreq.path == (0, 1, 2) and first.rreq.hop_count == 1
    assert r.handle_rreq(rreq) is None


def test_origin_ignores_its_own_request():
    assert Router(0).handle_rreq(RouteRequest(0, 6, 1, path=(0,))) is None


def test_forged_sequence_without_observation():
    assert forged_sequence(None) == 4096
    assert forged_sequence(3, offset=10) == 13


# -- route selection ----------------------------------------------------------------


def rec(replier, seq, hops, route):
    return RouteReplyRecord(replier, seq, hops, route)


def test_select_prefers_highest_sequence():
    honest = rec(6, 1, 4, (0, 1, 2, 4, 6))
    forged = rec(3, 4097, 1, (0, 3, 6))
    entry = select_route([honest, forged])
    assert entry.route == (0, 3, 6) and entry.next_hop == 3 and entry.destination == 6


def test_select_breaks_ties_on_hops_then_replier():
    a = rec(6, 5, 3, (0, 1, 2, 6))
    b = rec(6, 5, 2, (0, 4, 6))
    assert select_route([a, b]).route == (0, 4, 6)
    c = rec(5, 5, 2, (0, 5, 6))
    assert select_route([b, c]).route == (0, 5, 6)


def test_select_on_empty_cache_raises():
    with pytest.raises(NoRoute):
        select_route([])


def test_reply_record_requires_replier_on_route():
    with pytest.raises(ValueError):
        RouteReplyRecord(9, 1, 0, (0, 1))


def test_route_avoids():
    assert route_avoids((0, 1, 2), {3})
    assert not route_avoids((0, 3, 2), {3})


# -- discovery inside a network -----------------------------------------------------


def discover(cfg, until=0.5):
    net = Network(cfg.replace(packets=1))
    net.run(until)
    return net


def test_chain_discovery_finds_the_three_hop_route():
    net = discover(chain(4))
    assert net.active_route == (0, 1, 2, 3)
    assert [r.hop_count for r in net.discovery.cache] == [3]


def test_disconnected_destination_stalls_after_retries():
    cfg = ScenarioConfig(positions=((10, 10), (490, 490), (250, 10)), range=100.0,
                         source=0, destination=1, packets=5, drain=10.0)
    result = simulate(cfg)
    assert result.stalled and result.routes == []
    assert sum(r.kind == "stall" for r in result.trace) == 1
    rreqs = {r.seq for r in result.trace if r.kind == "transmit" and r.ptype == "RREQ"}
    assert len(rreqs) == 1 + cfg.discovery_retries


def _simple_paths(adj, s, d, avoid):
    """Enumeration oracle: all simple paths s->d whose interior avoids ``avoid``."""
    out = []

    def walk(path):
        u = path[-1]
        if u == d:
            out.append(tuple(path))
            return
        for v in sorted(adj[u]):
            if v not in path and v not in avoid:
                walk(path + [v])

    walk([s])
    return out


def test_black_hole_neighbour_yields_forged_and_honest_replies(capsys):
    from manetids.config import load_preset
    cfg = load_preset("paper-blackhole-noids")
    net = discover(cfg)
    cache = net.discovery.cache
    topo = Topology(cfg.node_positions(), cfg.range)
    adj = {v: topo.neighbors(v) for v in topo.nodes}
    honest_paths = _simple_paths(adj, 0, 6, avoid={3})
    assert honest_paths, "oracle: an honest path must exist"
    assert len(cache) >= 2
    forged = [r for r in cache if r.replier == 3]
    honest = [r for r in cache if r.replier == 6]
    assert forged and honest
    assert all(r.route in honest_paths for r in honest)
    assert net.active_route == forged[0].route


def test_black_hole_without_ids_swallows_traffic():
    from manetids.config import load_preset
    result = simulate(load_preset("paper-blackhole-noids").replace(packets=400))
    c = result.counters
    assert c.dropped_adversary >= 0.99 * c.sent
    assert c.delivered <= 0.01 * c.sent


def test_exclusion_reroutes_around_the_accused():
    # diamond: 0 -> {1, 2} -> 3
    cfg = ScenarioConfig(positions=((10, 250), (110, 200), (110, 300), (210, 250)), range=120.0,
                         source=0, destination=3, packets=1)
    net = Network(cfg)
    net.run(0.5)
    first = net.active_route
    net.exclude_and_rediscover(first[1])
    net.engine.run(1.5)
    assert net.active_route is not None and first[1] not in net.active_route
    assert len(net.active_route) == 3


def test_exclusion_of_cut_vertex_stalls():
    net = Network(chain(3, packets=1))
    net.run(0.5)
    net.exclude_and_rediscover(1)
    net.engine.run(10.0)
    assert net.active_route is None and net.stalled


def test_exclusion_off_route_keeps_route():
    cfg = ScenarioConfig(positions=((10, 250), (110, 250), (210, 250), (110, 450)), range=120.0,
                         source=0, destination=2, packets=1)
    net = Network(cfg)
    net.run(0.5)
    before = net.active_route
    net.exclude_and_rediscover(3)
    net.engine.run(1.5)
    assert net.active_route == before


def test_endpoints_cannot_be_excluded():
    net = Network(chain(3, packets=1))
    with pytest.raises(ValueError):
        net.exclude_and_rediscover(0)


# -- properties ---------------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=10_000), min_size=1, max_size=10))
def test_forged_sequence_beats_every_honest_one(seen):
    bh = Router(3, NodeBehavior.BLACK_HOLE)
    for s in seen:
        bh.observe_dest_seq(s)
    forged = bh.handle_rreq(RouteRequest(0, 6, 1, dest_seq_known=0, path=(0,)))
    assert all(forged.record.dest_seq > s for s in seen)
    honest = [rec(6, s, 3, (0, 1, 2, 6)) for s in seen]
    assert select_route(honest + [forged.record]).route == forged.record.route


grid_points = [(10.0 + 100 * x, 10.0 + 100 * y) for x in range(3) for y in range(3)]


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(min_value=0, max_value=8), min_size=2, max_size=9),
       st.data())
def test_honest_connected_network_delivers_everything(subset, data):
    nodes = sorted(subset)
    positions = tuple(grid_points[i] for i in nodes)
    topo = Topology(dict(enumerate(positions)), 100.0)
    if not topo.is_connected():
        return
    s, d = data.draw(st.sampled_from(list(itertools.permutations(range(len(nodes)), 2))))
    cfg = ScenarioConfig(positions=positions, range=100.0, grid=300.0, source=s, destination=d,
                         packets=30, baseline_loss=0.0)
    result = simulate(cfg)
    assert result.counters.delivered == 30


def test_honest_node_ignores_request_through_blacklisted_node():
    r = Router(2)
    rreq = RouteRequest(0, 6, 4, path=(0, 3), avoid=frozenset({3}))
    assert r.handle_rreq(rreq) is None
    clean = RouteRequest(0, 6, 4, path=(0, 1), avoid=frozenset({3}))
    assert isinstance(r.handle_rreq(clean), Rebroadcast)
