"""Promiscuous-listening cost model and per-run metric aggregation.

Two closed forms for the selective scheme are shipped side by side. The
published one, ``l*(n/l - 2) + 2*(l - 2)``, expands to ``n - 4`` for every
cluster size, so it only agrees with the published table on the L=3 row
(and the N=12, L=6 cell). ``3*(n/l) + 2*(l - 2) - 6`` is a descriptive fit
that reproduces all nine published cells; it is not a derived model.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Optional, Sequence

# published promiscuous-listening counts: (n, l) -> count; l=None is the Watchdog row
PUBLISHED_TABLE: Dict[tuple, int] = {
    (12, 3): 8, (24, 3): 20, (36, 3): 32,
    (12, 4): 7, (24, 4): 16, (36, 4): 25,
    (12, 6): 8, (24, 6): 14, (36, 6): 20,
    (12, None): 10, (24, None): 22, (36, None): 34,
}

CSV_HEADER = ("scheme", "n", "l", "seed", "sent", "delivered", "pdr", "listen_events",
              "detection_time")


class ConservationError(AssertionError):
    pass


class ScenarioMismatch(ValueError):
    pass


def watchdog_listens(n: int) -> int:
    if n < 2:
        raise ValueError("need at least the two flow endpoints")
    return n - 2


def _check_divisible(n: int, l: int) -> None:
    if l < 2 or n % l:
        raise ValueError(f"cluster size {l} must be >= 2 and divide n={n}")


def selective_listens_published_formula(n: int, l: int) -> int:
    _check_divisible(n, l)
    return l * (n // l - 2) + 2 * (l - 2)


def selective_listens_table_fit(n: int, l: int) -> int:
    _check_divisible(n, l)
    return 3 * (n // l) + 2 * (l - 2) - 6


@dataclass(frozen=True)
class TableCell:
    n: int
    l: Optional[int]
    published: int
    computed: int
    formula: str

    @property
    def matches(self) -> bool:
        return self.published == self.computed


def analytic_table(ns: Sequence[int] = (12, 24, 36), ls: Sequence[int] = (3, 4, 6)) -> List[TableCell]:
    cells = []
    for l in ls:
        for n in ns:
            pub = PUBLISHED_TABLE.get((n, l))
            if pub is None:
                continue
            cells.append(TableCell(n, l, pub, selective_listens_published_formula(n, l), "published"))
            cells.append(TableCell(n, l, pub, selective_listens_table_fit(n, l), "fit"))
    for n in ns:
        pub = PUBLISHED_TABLE.get((n, None))
        if pub is not None:
            cells.append(TableCell(n, None, pub, watchdog_listens(n), "watchdog"))
    return cells


def explain_collapse() -> str:
    return ("l*(n/l - 2) + 2*(l - 2) = n - 2l + 2l - 4 = n - 4, independent of l;\n"
            "table fit: 3*(n/l) + 2*(l - 2) - 6 reproduces every published selective cell.")


def round_half_up(value: float, places: int = 2) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


@dataclass
class RunMetrics:
    scheme: str
    scenario: str
    n: int
    l: int
    seed: int
    sent: int = 0
    delivered: int = 0
    dropped_adversary: int = 0
    dropped_baseline: int = 0
    dropped_route: int = 0
    in_flight: int = 0
    pdr: Optional[float] = None
    drop_pct: Optional[float] = None
    listen_events: int = 0
    detection_time: Optional[float] = None
    alarms: list = field(default_factory=list)
    stalled: bool = False

    def csv_row(self) -> tuple:
        det = "" if self.detection_time is None else f"{self.detection_time:.6f}"
        pdr = "" if self.pdr is None else f"{self.pdr:.2f}"
        return (self.scheme, self.n, self.l, self.seed, self.sent, self.delivered, pdr,
                self.listen_events, det)


_TERMINAL = {"recv": "delivered", "drop-adv": "dropped_adversary",
             "drop-loss": "dropped_baseline", "drop-route": "dropped_route"}


def aggregate(result) -> RunMetrics:
    """Recount a finished run from its trace and audit packet conservation."""
    sent_ids = set()
    terminal: Dict[int, str] = {}
    counts = Counter()
    listens = 0
    for rec in result.trace:
        if rec.kind == "listen":
            listens += 1
            continue
        if rec.ptype != "DATA":
            continue
        if rec.kind == "send":
            if rec.pid in sent_ids:
                raise ConservationError(f"data packet {rec.pid} sent twice")
            sent_ids.add(rec.pid)
        elif rec.kind in _TERMINAL:
            if rec.pid not in sent_ids:
                raise ConservationError(f"data packet {rec.pid} ended before it was sent")
            if rec.pid in terminal:
                raise ConservationError(f"data packet {rec.pid} ended twice "
                                        f"({terminal[rec.pid]}, {rec.kind})")
            terminal[rec.pid] = rec.kind
            counts[_TERMINAL[rec.kind]] += 1
    sent = len(sent_ids)
    in_flight = sent - len(terminal)
    cfg = result.config
    m = RunMetrics(result.scheme, cfg.name, cfg.node_count, cfg.cluster_size, result.seed,
                   sent, counts["delivered"], counts["dropped_adversary"],
                   counts["dropped_baseline"], counts["dropped_route"], in_flight,
                   listen_events=listens, alarms=list(result.alarms), stalled=result.stalled)
    live = result.counters
    for name in ("sent", "delivered", "dropped_adversary", "dropped_baseline", "dropped_route",
                 "listen_events"):
        if getattr(live, name) != getattr(m, name):
            raise ConservationError(f"{name}: trace says {getattr(m, name)}, "
                                    f"live counter says {getattr(live, name)}")
    if sent:
        m.pdr = round_half_up(m.delivered / sent * 100)
        m.drop_pct = round_half_up((sent - m.delivered - in_flight) / sent * 100)
    if result.alarms:
        m.detection_time = result.alarms[0].detection_time
    return m


def _ratio(a, b) -> Optional[float]:
    if a is None or b is None:
        return None
    if b == 0:
        return 1.0 if a == 0 else None
    return a / b


def compare(runs: Sequence[RunMetrics], labels: Optional[Sequence[str]] = None) -> dict:
    """Side-by-side view of runs of one scenario; ratios are relative to the first run."""
    if len(runs) < 2:
        raise ValueError("need at least two runs to compare")
    labels = list(labels) if labels is not None else [r.scheme for r in runs]
    if len(labels) != len(runs):
        raise ValueError("one label per run")
    key = {(r.n, r.l, r.seed, _base_scenario(r.scenario)) for r in runs}
    if len(key) != 1:
        raise ScenarioMismatch(f"runs come from different scenarios: {sorted(key, key=str)}")
    base = runs[0]
    rows = []
    for label, r in zip(labels, runs):
        rows.append({
            "label": label, "scheme": r.scheme, "sent": r.sent, "delivered": r.delivered,
            "pdr": r.pdr, "listen_events": r.listen_events, "detection_time": r.detection_time,
            "listen_ratio": _ratio(base.listen_events, r.listen_events),
            "pdr_ratio": _ratio(r.pdr, base.pdr),
            "detection_ratio": _ratio(r.detection_time, base.detection_time),
        })
    return {"scenario": sorted(key)[0], "rows": rows}


def _base_scenario(name: str) -> str:
    for suffix in ("-noids", "-watchdog", "-selective", "-none"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def metrics_csv(rows: Iterable[RunMetrics], means: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    rows = list(rows)
    for r in rows:
        w.writerow(r.csv_row())
    if means:
        for row in mean_rows(rows):
            w.writerow(row)
    return buf.getvalue()


def mean_rows(rows: Sequence[RunMetrics]) -> List[tuple]:
    groups: Dict[tuple, List[RunMetrics]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.n, r.l), []).append(r)
    out = []
    for (scheme, n, l), rs in groups.items():
        def mean(vals):
            vals = [v for v in vals if v is not None]
            return sum(vals) / len(vals) if vals else None

        pdr = mean(r.pdr for r in rs)
        det = mean(r.detection_time for r in rs)
        out.append((scheme, n, l, "mean", f"{mean(r.sent for r in rs):.2f}",
                    f"{mean(r.delivered for r in rs):.2f}",
                    "" if pdr is None else f"{pdr:.2f}",
                    f"{mean(r.listen_events for r in rs):.2f}",
                    "" if det is None else f"{det:.6f}"))
    return out
