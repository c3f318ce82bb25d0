"""Scenario builders and the (n, l, seed) sweep harness."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .analytics import RunMetrics, aggregate
from .config import ScenarioConfig
from .medium import Topology
from .network import simulate

SWEEP_RANGE = 200.0
SOURCE_POS = (20.0, 20.0)
DEST_POS = (480.0, 480.0)
ADVERSARY_OFFSET = (80.0, 60.0)


def sweep_positions(n: int, seed: int, grid: float = 500.0, range_: float = SWEEP_RANGE,
                    max_tries: int = 10_000) -> Tuple[Tuple[float, float], ...]:
    """Seeded random placement: node 0 = source, 1 = destination, 2 = black hole.

    The black hole sits next to the source; the remaining nodes are drawn
    uniformly until the graph is connected and an honest source-destination
    path exists.
    """
    if n < 4:
        raise ValueError("a sweep scenario needs at least four nodes")
    rng = random.Random(f"placement:{n}:{seed}")
    adv = (SOURCE_POS[0] + ADVERSARY_OFFSET[0], SOURCE_POS[1] + ADVERSARY_OFFSET[1])
    for _ in range(max_tries):
        rest = [(round(rng.uniform(0, grid), 1), round(rng.uniform(0, grid), 1))
                for _ in range(n - 3)]
        positions = (SOURCE_POS, DEST_POS, adv, *rest)
        topo = Topology(dict(enumerate(positions)), range_)
        if topo.is_connected() and topo.hop_distance(0, 1, exclude=[2]) is not None:
            return positions
    raise RuntimeError(f"no connected placement found for n={n}, seed={seed}")


def sweep_scenario(n: int, l: int, seed: int, scheme: str, packets: int = 200,
                   base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    base = base or ScenarioConfig()
    return base.replace(
        name=f"sweep-n{n}-l{l}-s{seed}-{scheme}",
        positions=sweep_positions(n, seed, base.grid),
        nodes=None,
        range=SWEEP_RANGE,
        source=0, destination=1, adversaries=(2,),
        ids_mode=scheme, cluster_size=l, packets=packets, seed=seed,
    )


@dataclass(frozen=True)
class SweepCell:
    scheme: str
    n: int
    l: int
    seed: int
    packets: int = 200


@dataclass
class SweepRow:
    cell: SweepCell
    metrics: Optional[RunMetrics] = None
    error: Optional[str] = None


def run_cell(cell: SweepCell) -> SweepRow:
    try:
        cfg = sweep_scenario(cell.n, cell.l, cell.seed, cell.scheme, cell.packets)
        return SweepRow(cell, aggregate(simulate(cfg)))
    except Exception as exc:  # one bad cell must not abort the sweep
        return SweepRow(cell, error=f"{type(exc).__name__}: {exc}")


def sweep_cells(ns: Iterable[int], ls: Iterable[int], seeds: Iterable[int],
                schemes: Iterable[str], packets: int = 200) -> List[SweepCell]:
    return [SweepCell(s, n, l, seed, packets)
            for n in ns for l in ls for seed in seeds for s in schemes]


def run_sweep(cells: Sequence[SweepCell], workers: int = 1) -> List[SweepRow]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_cell, cells))
    return [run_cell(c) for c in cells]
