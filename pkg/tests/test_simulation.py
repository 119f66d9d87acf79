"""Whole-network properties of the Bitcoin layer on the engine."""
from collections import Counter

import pytest

from chainsim import build_world, load_config, run
from chainsim.bitcoin import GENESIS_ID
from chainsim.metrics import main_chain
from oracles import binomial_bounds

EXP1 = "exp1_desk.yaml"


@pytest.fixture(scope="module")
def finished_world(request):
    from pathlib import Path

    cfg = load_config(Path(__file__).resolve().parents[1] / "configs" / EXP1,
                      ["total_steps=1500000", "master_seed=5"])
    world = build_world(cfg)
    # mine for 1.5M steps, then stop mining and let gossip settle for 10^4 s
    events = world.engine.run(cfg.total_steps)
    for n in world.nodes:
        n.threshold = 0
    tail = world.engine.run(cfg.total_steps + 100_000, start_step=cfg.total_steps)
    return cfg, world, events, tail


def test_chain_consistency(finished_world):
    _, world, _, _ = finished_world
    for node in world.nodes:
        for bid in node.view.known_blocks:
            path = list(node.view.ancestors(bid))
            assert path[-1] == GENESIS_ID


def test_common_prefix(finished_world):
    _, world, _, _ = finished_world
    chains = [list(reversed(list(n.view.ancestors(n.view.tip)))) for n in world.nodes]
    min_h = min(len(c) - 1 for c in chains)
    prefix = 0
    while all(len(c) > prefix for c in chains) and len({c[prefix] for c in chains}) == 1:
        prefix += 1
    assert prefix - 1 >= min_h - 6


def test_gossip_completeness(finished_world):
    _, world, events, _ = finished_world
    for bid in main_chain(events)[1:]:
        assert all(bid in n.view.first_seen for n in world.nodes)


def test_no_inv_loops(finished_world):
    _, _, events, tail = finished_world
    invs = Counter((e.node_id, e.item_id, e.extra["to"]) for e in list(events) + list(tail) if e.event_kind == "INV_SENT")
    assert invs and max(invs.values()) == 1


def test_step_conservation(finished_world):
    _, world, _, _ = finished_world
    s = world.engine.stats
    assert s.packets_sent == s.packets_delivered + s.packets_pending
    assert s.packets_pending == 0


def test_single_miner_block_count(write_yaml, two_region_file):
    cfg_path = write_yaml("one.yaml", {
        "master_seed": 3, "total_steps": 3_000_000, "seconds_per_step": 0.1,
        "regions_file": str(two_region_file), "regions": ["a"],
        "topology": {"kind": "full_mesh"},
    })
    report, _ = run(load_config(cfg_path))
    assert report.node_count == 1
    assert 450 <= report.blocks_total <= 550
    lo, hi = binomial_bounds(3_000_000, 1 / 6000)
    assert lo <= report.blocks_total <= hi
    assert report.stale_blocks == 0
    assert report.d50_seconds == 0 and report.d90_seconds == 0


def test_zero_nodes(write_yaml):
    regions = write_yaml("empty.yaml", {
        "regions": [{"region_id": "a", "download_mbps": 1, "upload_mbps": 1, "node_count": 0, "mine_power_share": 0.5}],
        "latency_ms": {"a": {"a": 1}},
    })
    cfg_path = write_yaml("zero.yaml", {
        "total_steps": 1000, "regions_file": str(regions), "nodes_per_region": "full",
        "topology": {"kind": "full_mesh"},
    })
    report, events = run(load_config(cfg_path))
    assert report.blocks_total == 0 and len(events) == 0


def test_deterministic_eventlog(configs_dir):
    cfg = load_config(configs_dir / EXP1, ["total_steps=400000"])
    a = run(cfg)[1].dumps()
    b = run(load_config(configs_dir / EXP1, ["total_steps=400000"]))[1].dumps()
    assert a == b
    c = run(load_config(configs_dir / EXP1, ["total_steps=400000", "master_seed=2"]))[1].dumps()
    assert a != c


def test_strict_mode_matches(configs_dir):
    cfg = load_config(configs_dir / EXP1, ["total_steps=60000", "protocol.block_interval_seconds=60"])
    fast_report, fast = run(cfg)
    strict_report, strict = run(cfg, skip_idle=False)
    assert fast.dumps() == strict.dumps()
    assert fast_report == strict_report
    assert fast_report.blocks_total > 50


def test_metrics_recomputed_from_disk(configs_dir, tmp_path):
    from chainsim.engine import EventLog
    from chainsim.simulation import report_for

    cfg = load_config(configs_dir / EXP1, ["total_steps=600000"])
    report, events = run(cfg)
    events.write(tmp_path / "e.jsonl")
    again = report_for(EventLog.read(tmp_path / "e.jsonl"), cfg, build_world(cfg).connectivity)
    assert again == report


def test_tps_consistent_with_interval(configs_dir):
    report, events = run(load_config(configs_dir / EXP1, ["total_steps=6000000", "master_seed=9"]))
    from chainsim.metrics import mined_blocks

    blocks = mined_blocks(events)
    chain = main_chain(events)[1:]
    mean_tx = sum(blocks[b].tx_count for b in chain) / len(chain)
    lhs = report.tps
    rhs = mean_tx / (report.avg_block_interval_minutes * 60)
    assert lhs == pytest.approx(rhs, rel=0.05)


def test_disconnected_topology_warns(write_yaml):
    cfg_path = write_yaml("split.yaml", {
        "total_steps": 200_000,
        "topology": {"kind": "explicit_edges", "edges": [[0, 1], [2, 3]]},
    })
    report, _ = run(load_config(cfg_path))
    assert not report.connected and report.components == 7
    assert any("disconnected" in w for w in report.warnings)


def test_full_node_count_mode(write_yaml, two_region_file):
    cfg = load_config(write_yaml("full.yaml", {
        "total_steps": 10, "regions_file": str(two_region_file), "nodes_per_region": "full",
        "topology": {"kind": "ring"},
    }))
    assert cfg.node_count == 2
    plan = cfg.node_plan()
    assert [p.mine_power for p in plan] == pytest.approx([0.3, 0.7])
