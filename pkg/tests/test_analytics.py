import itertools
from dataclasses import replace
from types import SimpleNamespace

import pytest

from manetids.analytics import (PUBLISHED_TABLE, ConservationError, RunMetrics, ScenarioMismatch,
                                aggregate, analytic_table, compare, metrics_csv, round_half_up,
                                selective_listens_published_formula, selective_listens_table_fit,
                                watchdog_listens)
from manetids.config import ScenarioConfig
from manetids.engine import TraceRecord
from manetids.network import Counters, simulate

from conftest import chain


def test_watchdog_cost_is_every_forwarder():
    assert [watchdog_listens(n) for n in (12, 24, 36)] == [10, 22, 34]


def test_published_formula_examples():
    assert selective_listens_published_formula(12, 3) == 8
    assert selective_listens_published_formula(36, 6) == 32


def test_published_formula_collapses_to_n_minus_four():
    for n in range(6, 601):
        for l in range(2, n + 1):
            if n % l == 0:
                assert selective_listens_published_formula(n, l) == n - 4


def test_fit_reproduces_every_published_selective_cell():
    for (n, l), published in PUBLISHED_TABLE.items():
        if l is not None:
            assert selective_listens_table_fit(n, l) == published


def test_fit_is_the_unique_small_integer_linear_form():
    # brute force a*(n/l) + b*l + c over small integers; only (3, 2, -10) fits
    cells = [(n, l, v) for (n, l), v in PUBLISHED_TABLE.items() if l is not None]
    hits = [(a, b, c) for a, b, c in itertools.product(range(-6, 7), range(-6, 7), range(-20, 21))
            if all(a * (n // l) + b * l + c == v for n, l, v in cells)]
    assert hits == [(3, 2, -10)]


def test_selective_never_exceeds_watchdog():
    for n in range(6, 300):
        for l in range(3, n + 1):
            if n % l == 0:
                assert selective_listens_published_formula(n, l) <= watchdog_listens(n)
                if n // l >= 2:
                    assert selective_listens_table_fit(n, l) <= watchdog_listens(n)


def test_indivisible_or_tiny_cluster_rejected():
    with pytest.raises(ValueError):
        selective_listens_published_formula(10, 3)
    with pytest.raises(ValueError):
        selective_listens_table_fit(12, 1)


def test_analytic_table_flags_exactly_the_known_mismatches():
    cells = analytic_table()
    bad = sorted((c.n, c.l) for c in cells if c.formula == "published" and not c.matches)
    assert bad == [(12, 4), (24, 4), (24, 6), (36, 4), (36, 6)]
    assert all(c.matches for c in cells if c.formula in ("fit", "watchdog"))


def test_round_half_up():
    assert round_half_up(99.695) == 99.70
    assert round_half_up(0.125) == 0.13
    assert round_half_up(2.5, 0) == 3.0


# -- aggregation --------------------------------------------------------------------


def synthetic(outcomes, scheme="none", alarms=()):
    """A fake run: one send per packet followed by the given terminal kind (or None)."""
    trace, live = [], Counters()
    keys = {"recv": "delivered", "drop-adv": "dropped_adversary",
            "drop-loss": "dropped_baseline", "drop-route": "dropped_route"}
    for pid, kind in enumerate(outcomes, start=1):
        trace.append(TraceRecord(pid * 0.25, "send", 0, 6, "DATA", pid, pid))
        live.sent += 1
        if kind is not None:
            trace.append(TraceRecord(pid * 0.25 + 0.01, kind, 0, 6, "DATA", pid, pid))
            setattr(live, keys[kind], getattr(live, keys[kind]) + 1)
    return SimpleNamespace(trace=trace, counters=live, config=ScenarioConfig(name="synthetic"),
                           scheme=scheme, seed=1, alarms=list(alarms), stalled=False)


def test_pdr_from_997_of_1000():
    m = aggregate(synthetic(["recv"] * 997 + ["drop-loss"] * 3))
    assert m.pdr == 99.70 and m.drop_pct == 0.30


def test_adversary_drops_counted_separately():
    m = aggregate(synthetic(["recv"] * 3 + ["drop-adv"] * 997))
    assert m.pdr == 0.30 and m.dropped_adversary == 997


def test_in_flight_packets_are_neither_delivered_nor_dropped():
    m = aggregate(synthetic(["recv"] * 8 + [None] * 2))
    assert m.in_flight == 2 and m.pdr == 80.0 and m.drop_pct == 0.0


def test_empty_run_has_no_pdr():
    m = aggregate(synthetic([]))
    assert m.sent == 0 and m.pdr is None and m.detection_time is None


def test_double_terminal_event_breaks_conservation():
    run = synthetic(["recv"] * 5)
    run.trace.append(TraceRecord(9.0, "drop-adv", 0, 6, "DATA", 3, 3))
    with pytest.raises(ConservationError):
        aggregate(run)


def test_tampered_trace_disagrees_with_live_counters():
    run = simulate(chain(4, packets=50, baseline_loss=0.0))
    run.trace = [r for r in run.trace if not (r.kind == "recv" and r.pid == 10)]
    with pytest.raises(ConservationError):
        aggregate(run)


def test_real_run_recount_matches_live_counters():
    run = simulate(chain(4, packets=200, baseline_loss=0.0))
    m = aggregate(run)
    assert (m.sent, m.delivered, m.pdr) == (200, 200, 100.0)


def metrics(scheme, scenario="s", listens=10, pdr=90.0, det=5.0):
    return RunMetrics(scheme, f"{scenario}-{scheme}", 12, 3, 1, 100, int(pdr), pdr=pdr,
                      listen_events=listens, detection_time=det)


def test_compare_reports_ratios_against_first_run():
    out = compare([metrics("watchdog", listens=400, det=24.0),
                   metrics("selective", listens=40, det=17.0)])
    rows = {r["label"]: r for r in out["rows"]}
    assert rows["selective"]["listen_ratio"] == 10.0
    assert rows["selective"]["detection_ratio"] == pytest.approx(17 / 24)


def test_compare_rejects_different_scenarios():
    with pytest.raises(ScenarioMismatch):
        compare([metrics("watchdog", "a"), metrics("selective", "b")])
    with pytest.raises(ScenarioMismatch):
        compare([metrics("watchdog"), replace(metrics("selective"), seed=2)])


def test_compare_needs_two_runs():
    with pytest.raises(ValueError):
        compare([metrics("watchdog")])


def test_csv_layout():
    text = metrics_csv([metrics("watchdog"), metrics("watchdog")], means=True)
    lines = text.splitlines()
    assert lines[0] == "scheme,n,l,seed,sent,delivered,pdr,listen_events,detection_time"
    assert lines[1] == "watchdog,12,3,1,100,90,90.00,10,5.000000"
    assert lines[-1].startswith("watchdog,12,3,mean,")
