"""Command line: run, sweep, analytic, validate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import analytics
from .analytics import ConservationError, aggregate, metrics_csv
from .config import PRESETS, ConfigError, load_config, load_preset, validate_config
from .engine import format_trace
from .experiments import run_sweep, sweep_cells
from .ids import format_alarm
from .network import simulate


def _int_list(values: List[str]) -> List[int]:
    out = []
    for v in values:
        for part in v.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    return out


def _str_list(values: List[str]) -> List[str]:
    return [p.strip() for v in values for p in v.split(",") if p.strip()]


def _load(args):
    if args.preset:
        return load_preset(args.preset)
    return load_config(args.config)


def summary_text(result, metrics) -> str:
    cfg = result.config
    lines = [
        f"scenario: {cfg.name}",
        f"seed: {result.seed}",
        f"ids: {result.scheme}",
        f"nodes: {cfg.node_count}  cluster size: {cfg.cluster_size}",
        f"adversaries: {', '.join(map(str, cfg.adversaries)) or 'none'}",
        f"packets sent: {metrics.sent}",
        f"packets delivered: {metrics.delivered}",
        f"dropped by adversary: {metrics.dropped_adversary}",
        f"dropped by baseline loss: {metrics.dropped_baseline}",
        f"dropped on route failure: {metrics.dropped_route}",
        f"in flight at end: {metrics.in_flight}",
        f"pdr: {'n/a' if metrics.pdr is None else f'{metrics.pdr:.2f}%'}",
        f"drop: {'n/a' if metrics.drop_pct is None else f'{metrics.drop_pct:.2f}%'}",
        f"promiscuous-listen events: {metrics.listen_events}",
        "detection time: " + ("none" if metrics.detection_time is None
                              else f"{metrics.detection_time:.6f} s"),
        f"stalled: {'yes' if metrics.stalled else 'no'}",
    ]
    for route in result.routes:
        lines.append(f"route: {list(route)}")
    for alarm in result.alarms:
        lines.append(format_alarm(alarm))
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return 2
    result = simulate(cfg, args.seed)
    try:
        metrics = aggregate(result)
    except ConservationError as exc:
        print(f"conservation audit failed: {exc}", file=sys.stderr)
        return 3
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.txt").write_text(format_trace(result.trace))
    (out / "metrics.csv").write_text(metrics_csv([metrics]))
    summary = summary_text(result, metrics)
    (out / "summary.txt").write_text(summary)
    if not args.quiet:
        sys.stdout.write(summary)
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(d)
        return 1
    problems = validate_config(cfg)
    for d in problems:
        print(d)
    if not problems:
        print("ok")
    return 1 if problems else 0


def analytic_report(explain: bool = False) -> str:
    cells = analytics.analytic_table()
    lines = ["row,n,formula,published,computed,status"]
    for c in cells:
        row = "watchdog" if c.l is None else f"L={c.l}"
        lines.append(f"{row},{c.n},{c.formula},{c.published},{c.computed},"
                     f"{'match' if c.matches else 'MISMATCH'}")
    if explain:
        lines.append("")
        lines.extend(analytics.explain_collapse().splitlines())
        bad = [c for c in cells if c.formula == "published" and not c.matches]
        lines.append("published-formula mismatches: " +
                     ", ".join(f"(n={c.n}, l={c.l}): {c.computed} vs {c.published}" for c in bad))
    return "\n".join(lines) + "\n"


def cmd_analytic(args) -> int:
    sys.stdout.write(analytic_report(args.explain))
    return 0


def cmd_sweep(args) -> int:
    if args.analytic:
        sys.stdout.write(analytic_report(True))
        return 0
    ns, ls = _int_list(args.n), _int_list(args.l)
    seeds, schemes = _int_list(args.seeds), _str_list(args.schemes)
    bad = [f"l={l}" for l in ls if l < 3] + [f"n={n}" for n in ns if n < 4]
    bad += [f"scheme={s}" for s in schemes if s not in ("none", "watchdog", "selective")]
    if bad:
        print("invalid sweep parameters: " + ", ".join(bad), file=sys.stderr)
        return 2
    rows = run_sweep(sweep_cells(ns, ls, seeds, schemes, args.packets), args.workers)
    good = [r.metrics for r in rows if r.metrics is not None]
    text = metrics_csv(good, means=True)
    failed = [r for r in rows if r.error]
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for r in failed:
        c = r.cell
        print(f"failed: {c.scheme},{c.n},{c.l},{c.seed}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetids",
                                description="MANET black-hole simulator with Watchdog and "
                                            "Selective Watchdog detection")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write trace/metrics/summary")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario TOML file")
    src.add_argument("--preset", choices=PRESETS)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="run an (n, l, seed, scheme) grid and emit CSV")
    sw.add_argument("--n", nargs="+", default=["12,24,36"])
    sw.add_argument("--l", nargs="+", default=["3,4,6"])
    sw.add_argument("--seeds", nargs="+", default=["1-10"])
    sw.add_argument("--schemes", nargs="+", default=["watchdog,selective"])
    sw.add_argument("--packets", type=int, default=200)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", help="CSV path (default stdout)")
    sw.add_argument("--analytic", action="store_true",
                    help="print the closed-form tables instead of simulating")
    sw.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analytic", help="closed-form listening counts vs the published table")
    an.add_argument("--explain", action="store_true")
    an.set_defaults(func=cmd_analytic)

    va = sub.add_parser("validate", help="check a scenario file")
    vsrc = va.add_mutually_exclusive_group(required=True)
    vsrc.add_argument("--config")
    vsrc.add_argument("--preset", choices=PRESETS)
    va.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
