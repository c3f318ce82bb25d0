"""Scenario configuration: schema, TOML loading, validation and presets.

Config files are TOML with a top-level ``schema = 1`` and the sections
listed in ``SCHEMA``. Unknown sections or keys are rejected so that a typo
cannot silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import random
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
IDS_MODES = ("none", "watchdog", "selective")

# section -> key -> ScenarioConfig field
SCHEMA: Dict[str, Dict[str, str]] = {
    "topology": {"grid": "grid", "positions": "positions", "nodes": "nodes",
                 "placement_seed": "placement_seed"},
    "medium": {"range": "range", "per_hop_latency": "per_hop_latency",
               "baseline_loss": "baseline_loss"},
    "traffic": {"source": "source", "destination": "destination",
                "packet_size": "packet_size", "interval": "interval",
                "packets": "packets", "start": "start"},
    "adversary": {"nodes": "adversaries", "forge_offset": "forge_offset"},
    "ids": {"mode": "ids_mode", "cluster_size": "cluster_size", "slack": "slack",
            "tolerance": "tolerance", "alarm_threshold": "alarm_threshold",
            "min_observations": "min_observations", "forward_timeout": "forward_timeout",
            "segment_timeout": "segment_timeout", "ack_timeout": "ack_timeout"},
    "routing": {"discovery_timeout": "discovery_timeout",
                "discovery_retries": "discovery_retries", "reply_wait": "reply_wait"},
    "run": {"seed": "seed", "drain": "drain"},
}
TOP_LEVEL = {"schema", "name"}


class ConfigError(ValueError):
    def __init__(self, diagnostics: List[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    grid: float = 500.0
    positions: Optional[Tuple[Tuple[float, float], ...]] = None
    nodes: Optional[int] = None
    placement_seed: int = 0

    range: float = 250.0
    per_hop_latency: float = 0.002
    baseline_loss: float = 0.003

    source: int = 0
    destination: int = 1
    packet_size: int = 512
    interval: float = 0.25
    packets: int = 1000
    start: float = 0.0

    adversaries: Tuple[int, ...] = ()
    forge_offset: int = 4096

    ids_mode: str = "none"
    cluster_size: int = 3
    slack: int = 10
    tolerance: float = 0.05
    alarm_threshold: float = 0.20
    min_observations: int = 20
    forward_timeout: float = 20.0
    segment_timeout: Optional[float] = None
    ack_timeout: Optional[float] = None

    discovery_timeout: float = 1.0
    discovery_retries: int = 3
    reply_wait: float = 0.05

    seed: int = 1
    drain: float = 2.0

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def node_positions(self) -> Dict[int, Tuple[float, float]]:
        if self.positions is not None:
            return {i: (float(x), float(y)) for i, (x, y) in enumerate(self.positions)}
        rng = random.Random(self.placement_seed)
        return {i: (rng.uniform(0, self.grid), rng.uniform(0, self.grid))
                for i in range(self.nodes or 0)}

    @property
    def node_count(self) -> int:
        if self.positions is not None:
            return len(self.positions)
        return self.nodes or 0

    @property
    def duration(self) -> float:
        return self.start + self.packets * self.interval + self.drain


def validate_config(config: ScenarioConfig) -> List[str]:
    """Diagnostics as ``field: constraint`` strings; empty means runnable."""
    d: List[str] = []
    n = config.node_count
    if config.positions is None and config.nodes is None:
        d.append("topology.positions: give explicit positions or a node count")
    if n < 2:
        d.append("topology: at least two nodes are required")
    if config.grid <= 0:
        d.append("topology.grid: must be positive")
    if config.positions is not None:
        for i, p in enumerate(config.positions):
            if len(p) != 2:
                d.append(f"topology.positions[{i}]: expected [x, y]")
                continue
            x, y = p
            if not (0 <= x <= config.grid and 0 <= y <= config.grid):
                d.append(f"topology.positions[{i}]: ({x}, {y}) lies outside the "
                         f"{config.grid:g}x{config.grid:g} grid")
    if config.range <= 0:
        d.append("medium.range: must be positive")
    if config.per_hop_latency < 0:
        d.append("medium.per_hop_latency: must be non-negative")
    if not 0.0 <= config.baseline_loss < 1.0:
        d.append("medium.baseline_loss: must lie in [0, 1)")

    ids = range(n)
    if config.source not in ids:
        d.append(f"traffic.source: node {config.source} does not exist")
    if config.destination not in ids:
        d.append(f"traffic.destination: node {config.destination} does not exist")
    if config.source == config.destination:
        d.append("traffic.destination: must differ from the source")
    if config.interval <= 0:
        d.append("traffic.interval: must be positive")
    if config.packets < 0:
        d.append("traffic.packets: must be non-negative")
    if config.packet_size <= 0:
        d.append("traffic.packet_size: must be positive")
    if config.start < 0:
        d.append("traffic.start: must be non-negative")

    for a in config.adversaries:
        if a not in ids:
            d.append(f"adversary.nodes: node {a} does not exist")
        elif a in (config.source, config.destination):
            d.append(f"adversary.nodes: node {a} is a flow endpoint; source and "
                     f"destination are trusted and cannot be malicious")
    if len(set(config.adversaries)) != len(config.adversaries):
        d.append("adversary.nodes: duplicate node ids")
    if config.forge_offset <= 0:
        d.append("adversary.forge_offset: must be positive")

    if config.ids_mode not in IDS_MODES:
        d.append(f"ids.mode: {config.ids_mode!r} is not one of {', '.join(IDS_MODES)}")
    if config.cluster_size < 3:
        d.append("ids.cluster_size: must be at least 3 (a segment spans three nodes)")
    if config.slack < 0:
        d.append("ids.slack: must be non-negative")
    if not 0.0 <= config.tolerance < 1.0:
        d.append("ids.tolerance: must lie in [0, 1)")
    if not 0.0 < config.alarm_threshold < 1.0:
        d.append("ids.alarm_threshold: must lie in (0, 1)")
    if config.min_observations < 1:
        d.append("ids.min_observations: must be at least 1")
    for key in ("forward_timeout", "segment_timeout", "ack_timeout"):
        v = getattr(config, key)
        if v is not None and v <= 0:
            d.append(f"ids.{key}: must be positive")
    if config.discovery_timeout <= 0:
        d.append("routing.discovery_timeout: must be positive")
    if config.discovery_retries < 0:
        d.append("routing.discovery_retries: must be non-negative")
    if config.reply_wait < 0 or config.reply_wait >= config.discovery_timeout:
        d.append("routing.reply_wait: must lie in [0, discovery_timeout)")
    if config.drain < 0:
        d.append("run.drain: must be non-negative")
    return d


_INT_FIELDS = {"nodes", "placement_seed", "source", "destination", "packet_size", "packets",
               "forge_offset", "cluster_size", "slack", "min_observations",
               "discovery_retries", "seed"}
_STR_FIELDS = {"ids_mode", "name"}


def _coerce(fname: str, value, where: str, diags: List[str]):
    if fname == "positions":
        if not isinstance(value, list) or not all(isinstance(p, list) for p in value):
            diags.append(f"{where}: expected a list of [x, y] pairs")
            return None
        return tuple(tuple(float(c) for c in p) for p in value)
    if fname == "adversaries":
        if not isinstance(value, list) or not all(isinstance(v, int) for v in value):
            diags.append(f"{where}: expected a list of node ids")
            return None
        return tuple(value)
    if fname in _STR_FIELDS:
        if not isinstance(value, str):
            diags.append(f"{where}: expected a string")
            return None
        return value
    if fname in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            diags.append(f"{where}: expected an integer")
            return None
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        diags.append(f"{where}: expected a number")
        return None
    return float(value)


def config_from_dict(data: dict, diags: Optional[List[str]] = None) -> ScenarioConfig:
    diags = [] if diags is None else diags
    values = {}
    for key, value in data.items():
        if key in TOP_LEVEL:
            continue
        if key not in SCHEMA:
            diags.append(f"{key}: unknown section or key")
            continue
        if not isinstance(value, dict):
            diags.append(f"{key}: expected a [{key}] table")
            continue
        for sub, v in value.items():
            where = f"{key}.{sub}"
            fname = SCHEMA[key].get(sub)
            if fname is None:
                diags.append(f"{where}: unknown key")
                continue
            coerced = _coerce(fname, v, where, diags)
            if coerced is not None:
                values[fname] = coerced
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        diags.append(f"schema: expected {SCHEMA_VERSION}, got {schema!r}")
    if "name" in data:
        values["name"] = str(data["name"])
    return ScenarioConfig(**values)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{source}: {exc}"]) from None
    diags: List[str] = []
    config = config_from_dict(data, diags)
    diags.extend(validate_config(config))
    if diags:
        raise ConfigError([f"{source}: {m}" for m in diags])
    return config


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def config_to_toml(config: ScenarioConfig) -> str:
    out = [f"schema = {SCHEMA_VERSION}", f'name = "{config.name}"', ""]
    for section, keys in SCHEMA.items():
        lines = []
        for key, fname in keys.items():
            v = getattr(config, fname)
            if v is None:
                continue
            if fname == "positions":
                pts = ", ".join(f"[{x:g}, {y:g}]" for x, y in v)
                lines.append(f"{key} = [{pts}]")
            elif fname == "adversaries":
                lines.append(f"{key} = [{', '.join(str(a) for a in v)}]")
            elif isinstance(v, str):
                lines.append(f'{key} = "{v}"')
            else:
                lines.append(f"{key} = {v!r}")
        if lines:
            out.append(f"[{section}]")
            out.extend(lines)
            out.append("")
    return "\n".join(out)


PRESETS = ("paper-baseline", "paper-blackhole-noids", "paper-blackhole-watchdog",
           "paper-blackhole-selective")


def load_preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("manetids.presets").joinpath(f"{name}.toml").read_text()
    return parse_config(text, name)
