"""World construction from a :class:`SimConfig` and the end-to-end run."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from chainsim.bitcoin.blocks import MinerParams
from chainsim.bitcoin.miner import Miner, SelfishMiner
from chainsim.config import SimConfig
from chainsim.engine import Engine, EventLog, Item, Node
from chainsim.metrics import EmptyRun, MetricsReport, compute_metrics
from chainsim.netmodel.regions import compute_delay_steps
from chainsim.netmodel.topology import (
    Connectivity,
    NodeInfo,
    adjacency,
    build_topology,
    check_connectivity,
)
from chainsim.rng import derive_rng


@dataclass
class World:
    config: SimConfig
    engine: Engine
    nodes: list[Miner]
    edges: set[tuple[int, int]]
    connectivity: Connectivity
    attacker_id: int | None


def build_world(config: SimConfig) -> World:
    plan = config.node_plan()
    total_power = sum(p.mine_power for p in plan) or 1.0
    interval = config.block_interval_steps
    nodes: list[Miner] = []
    for p in plan:
        cls = SelfishMiner if p.selfish else Miner
        params = MinerParams(p.mine_power, total_power, interval)
        nodes.append(cls(p.node_id, p.region, params, config.master_seed, config.protocol))

    infos = [NodeInfo(n.node_id, n.region) for n in nodes]
    edges = build_topology(infos, config.topology, derive_rng(config.master_seed, None, "topology"))
    connectivity = check_connectivity(edges, len(nodes))

    regions = config.dataset.regions
    latency = config.dataset.latency
    sps = config.seconds_per_step

    def delay(sender: Node, recipient: Node, item: Item) -> int:
        return compute_delay_steps(regions[sender.region], regions[recipient.region], latency, item.size_bytes, sps)

    engine = Engine(nodes, delay, sps)
    engine.connect(adjacency(edges, len(nodes)))
    attacker = next((p.node_id for p in plan if p.selfish), None)
    return World(config, engine, nodes, edges, connectivity, attacker)


def report_for(events: EventLog, config: SimConfig, connectivity: Connectivity | None = None) -> MetricsReport:
    try:
        report = compute_metrics(events, config, attacker_id=config.attacker_id)
    except EmptyRun:
        report = MetricsReport.empty(config.node_count, config.total_steps * config.seconds_per_step)
    if connectivity is not None:
        report.connected = connectivity.connected
        report.components = connectivity.components
        if not connectivity.connected:
            report.warnings.append(f"topology is disconnected ({connectivity.components} components)")
    return report


def run(
    config: SimConfig,
    order: Sequence[int] | None = None,
    skip_idle: bool = True,
) -> tuple[MetricsReport, EventLog]:
    """Build the world, run it for ``config.total_steps`` steps, and compute metrics."""
    world = build_world(config)
    events = world.engine.run(config.total_steps, order=order, skip_idle=skip_idle)
    return report_for(events, config, world.connectivity), events
