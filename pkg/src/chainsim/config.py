"""Run configuration: YAML loading, overrides and validation."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import yaml

from chainsim.bitcoin.blocks import ProtocolParams
from chainsim.netmodel.expr import ParseError, parse_topology_expr
from chainsim.netmodel.regions import RegionDataError, RegionDataset, UnknownRegion, load_regions
from chainsim.netmodel.topology import KINDS, InvalidSpec, TopologySpec


class ConfigError(ValueError):
    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"{key} {reason}")


DEFAULTS: dict[str, Any] = {
    "master_seed": 0,
    "total_steps": None,
    "seconds_per_step": 0.1,
    "regions_file": "builtin:regions9.yaml",
    "regions": None,
    "nodes_per_region": 1,
    "topology": {"kind": "uniform_random_k", "k": 2},
    "protocol": {},
    "attacker": {"enabled": False, "alpha_share": 0.0, "region": None},
    "output": {"dir": "out", "eventlog": True},
}

_PROTOCOL_KEYS = set(ProtocolParams.__dataclass_fields__)
_ATTACKER_KEYS = {"enabled", "alpha_share", "region"}
_OUTPUT_KEYS = {"dir", "eventlog"}
_TOPOLOGY_KEYS = {"kind", "expression_text", "edges", "k"}


@dataclass(frozen=True)
class AttackerConfig:
    enabled: bool = False
    alpha_share: float = 0.0
    region: str | None = None


@dataclass(frozen=True)
class NodePlan:
    node_id: int
    region: str
    mine_power: float
    selfish: bool = False


@dataclass
class SimConfig:
    master_seed: int
    total_steps: int
    seconds_per_step: float
    regions_file: Path
    dataset: RegionDataset
    topology: TopologySpec
    nodes_per_region: int | str
    protocol: ProtocolParams
    attacker: AttackerConfig
    output_dir: Path
    write_eventlog: bool = True
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def block_interval_steps(self) -> int:
        return max(1, round(self.protocol.block_interval_seconds / self.seconds_per_step))

    def node_plan(self) -> list[NodePlan]:
        """Nodes in id order with their region and mining power.

        Powers are normalized to sum to 1. Within a region, power is split
        equally. An attacker takes over the first node of its region.
        """
        plan = []
        for region in self.dataset.regions.values():
            count = region.node_count if self.nodes_per_region == "full" else self.nodes_per_region
            if count == 0:
                continue
            for _ in range(count):
                plan.append([len(plan), region.region_id, region.mine_power_share / count, False])
        if self.attacker.enabled:
            idx = next((i for i, p in enumerate(plan) if p[1] == self.attacker.region), None)
            if idx is None:
                raise ConfigError("attacker.region", f"has no nodes: {self.attacker.region!r}")
            plan[idx][3] = True
            honest = sum(p[2] for p in plan if not p[3])
            for p in plan:
                if p[3]:
                    p[2] = self.attacker.alpha_share
                else:
                    p[2] = (1 - self.attacker.alpha_share) * p[2] / honest if honest > 0 else 0.0
        else:
            total = sum(p[2] for p in plan)
            for p in plan:
                p[2] = p[2] / total if total > 0 else 0.0
        return [NodePlan(*p) for p in plan]

    @property
    def node_count(self) -> int:
        if self.nodes_per_region == "full":
            return sum(r.node_count for r in self.dataset.regions.values())
        return self.nodes_per_region * len(self.dataset.regions)

    @property
    def attacker_id(self) -> int | None:
        if not self.attacker.enabled:
            return None
        return next(p.node_id for p in self.node_plan() if p.selfish)


def _set_path(d: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    cur = d
    for k in keys[:-1]:
        nxt = cur.get(k)
        if nxt is None:
            nxt = cur[k] = {}
        elif not isinstance(nxt, dict):
            raise ConfigError(dotted, f"cannot set a field inside non-mapping {k!r}")
        cur = nxt
    cur[keys[-1]] = value


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(text, "override must look like key=value")
    key, _, value = text.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(text, "override has an empty key")
    return key, yaml.safe_load(value) if value.strip() else None


def apply_overrides(raw: dict, overrides: Iterable[str | tuple[str, Any]]) -> dict:
    raw = copy.deepcopy(raw)
    for ov in overrides:
        key, value = parse_override(ov) if isinstance(ov, str) else ov
        _set_path(raw, key, value)
    return raw


def _merge_defaults(raw: dict) -> dict:
    merged = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if key not in DEFAULTS:
            raise ConfigError(key, "is not a recognized setting")
        if isinstance(DEFAULTS[key], dict) and isinstance(value, dict) and key != "topology":
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def _resolve_regions_file(value: str, base_dir: Path) -> Path:
    if value.startswith("builtin:"):
        return Path(str(resources.files("chainsim.data").joinpath(value[len("builtin:"):])))
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def _number(raw: dict, key: str, kind=float):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"must be a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(key, f"must be an integer, got {value!r}")
    return kind(value)


def _topology(raw: Any, node_count: int) -> TopologySpec:
    if not isinstance(raw, dict):
        raise ConfigError("topology", "must be a mapping")
    unknown = set(raw) - _TOPOLOGY_KEYS
    if unknown:
        raise ConfigError(f"topology.{sorted(unknown)[0]}", "is not a recognized setting")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError("topology.kind", f"must be one of {', '.join(KINDS)}")
    k = raw.get("k")
    if k is not None:
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ConfigError("topology.k", "must be a positive integer")
        if k >= node_count:
            raise ConfigError("topology.k", f"must be < node count ({k} >= {node_count})")
    edges = raw.get("edges")
    if edges is not None:
        try:
            edges = tuple((int(a), int(b)) for a, b in edges)
        except (TypeError, ValueError):
            raise ConfigError("topology.edges", "must be a list of [i, j] pairs") from None
    text = raw.get("expression_text")
    if text is not None:
        try:
            parse_topology_expr(str(text))
        except ParseError as exc:
            raise ConfigError("topology.expression_text", f"does not parse: {exc}") from None
    try:
        return TopologySpec(kind=kind, expression_text=text, edges=edges, k=k)
    except InvalidSpec as exc:
        raise ConfigError("topology", str(exc)) from None


def config_from_dict(raw: dict, base_dir: str | Path = ".") -> SimConfig:
    """Default and validate a raw mapping. Errors name the offending key."""
    base_dir = Path(base_dir)
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "must be a mapping")
    original = copy.deepcopy(raw)
    raw = _merge_defaults(raw)

    seed = raw["master_seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 1 << 64:
        raise ConfigError("master_seed", "must be an unsigned 64-bit integer")
    if raw["total_steps"] is None:
        raise ConfigError("total_steps", "is required")
    total_steps = _number(raw, "total_steps", int)
    if total_steps <= 0:
        raise ConfigError("total_steps", "must be > 0")
    sps = _number(raw, "seconds_per_step")
    if not sps > 0:
        raise ConfigError("seconds_per_step", "must be > 0")

    regions_file = _resolve_regions_file(str(raw["regions_file"]), base_dir)
    if not regions_file.exists():
        raise ConfigError("regions_file", f"does not exist: {regions_file}")
    try:
        dataset = load_regions(regions_file)
        if raw["regions"] is not None:
            dataset = dataset.subset(raw["regions"])
    except UnknownRegion as exc:
        raise ConfigError("regions", f"names an unknown region {exc}") from None
    except RegionDataError as exc:
        raise ConfigError("regions_file", str(exc)) from None

    npr = raw["nodes_per_region"]
    if npr != "full" and (isinstance(npr, bool) or not isinstance(npr, int) or npr < 1):
        raise ConfigError("nodes_per_region", "must be 'full' or a positive integer")

    unknown = set(raw["protocol"]) - _PROTOCOL_KEYS
    if unknown:
        raise ConfigError(f"protocol.{sorted(unknown)[0]}", "is not a recognized setting")
    proto_raw = raw["protocol"]
    for key, value in proto_raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"protocol.{key}", "must be a number")
        if value < 0 or (value == 0 and key in ("block_interval_seconds", "header_bytes")):
            raise ConfigError(f"protocol.{key}", "must be > 0")
    protocol = ProtocolParams(**proto_raw)

    att = raw["attacker"]
    if set(att) - _ATTACKER_KEYS:
        raise ConfigError(f"attacker.{sorted(set(att) - _ATTACKER_KEYS)[0]}", "is not a recognized setting")
    attacker = AttackerConfig(
        enabled=bool(att.get("enabled", False)),
        alpha_share=att.get("alpha_share", 0.0),
        region=att.get("region"),
    )
    if attacker.enabled:
        a = attacker.alpha_share
        if isinstance(a, bool) or not isinstance(a, (int, float)) or not 0 < a < 1:
            raise ConfigError("attacker.alpha_share", "must be in (0, 1)")
        if attacker.region not in dataset.regions:
            raise ConfigError("attacker.region", f"must name a configured region, got {attacker.region!r}")

    out = raw["output"]
    if set(out) - _OUTPUT_KEYS:
        raise ConfigError(f"output.{sorted(set(out) - _OUTPUT_KEYS)[0]}", "is not a recognized setting")

    cfg = SimConfig(
        master_seed=seed,
        total_steps=total_steps,
        seconds_per_step=sps,
        regions_file=regions_file,
        dataset=dataset,
        topology=TopologySpec(kind="full_mesh"),
        nodes_per_region=npr,
        protocol=protocol,
        attacker=attacker,
        output_dir=Path(out.get("dir", "out")),
        write_eventlog=bool(out.get("eventlog", True)),
        raw=original,
    )
    n = cfg.node_count
    cfg.topology = _topology(raw["topology"], n)

    powers = [r.mine_power_share for r in dataset.regions.values()]
    if n and not sum(powers) > 0:
        raise ConfigError("regions_file", "total mine power must be > 0")
    if attacker.enabled:
        honest = [p for p in cfg.node_plan() if not p.selfish]
        if honest and not any(p.mine_power > 0 for p in honest):
            raise ConfigError("attacker", "honest nodes must have some mining power")
    return cfg


def load_config(path: str | Path, overrides: Iterable[str | tuple[str, Any]] = ()) -> SimConfig:
    """Read a YAML config, apply ``key=value`` overrides, then validate."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(str(path), "does not exist")
    try:
        raw = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"is not valid YAML: {exc}") from None
    raw = apply_overrides(raw, overrides)
    return config_from_dict(raw, base_dir=path.parent)
