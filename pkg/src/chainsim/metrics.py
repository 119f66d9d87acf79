"""Post-run metrics computed from the event log.

All metrics here are pure functions of the log plus a few run constants
(seconds per step, total steps, node count), so a report recomputed from a
saved log matches the one produced at the end of the run.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from statistics import fmean, median
from typing import Iterable, NamedTuple

from chainsim.bitcoin.blocks import GENESIS_ID
from chainsim.engine import Event

PERCENTILES = (50, 90)


class EmptyRun(ValueError):
    pass


class MinedBlock(NamedTuple):
    block_id: int
    parent_id: int
    height: int
    miner_id: int
    created_step: int
    tx_count: int
    size_bytes: int


class BlockArrival(NamedTuple):
    block_id: int
    node_id: int
    step: int


@dataclass
class MetricsReport:
    avg_block_interval_minutes: float
    stale_rate_percent: float
    d50_seconds: float
    d90_seconds: float
    tps: float
    blocks_total: int
    blocks_main: int
    main_chain_height: int
    stale_blocks: int = 0
    d50_median_seconds: float = math.nan
    d90_median_seconds: float = math.nan
    d50_blocks_measured: int = 0
    d90_blocks_measured: int = 0
    d50_blocks_unreached: int = 0
    d90_blocks_unreached: int = 0
    node_count: int = 0
    duration_seconds: float = 0.0
    main_chain_tx: int = 0
    connected: bool = True
    components: int = 1
    attacker_id: int | None = None
    attacker_share: float | None = None
    races: int = 0
    race_gamma: float | None = None
    miner_main_blocks: dict[int, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def empty(cls, node_count: int = 0, duration_seconds: float = 0.0) -> "MetricsReport":
        return cls(
            avg_block_interval_minutes=math.nan,
            stale_rate_percent=0.0,
            d50_seconds=math.nan,
            d90_seconds=math.nan,
            tps=0.0,
            blocks_total=0,
            blocks_main=0,
            main_chain_height=0,
            node_count=node_count,
            duration_seconds=duration_seconds,
            warnings=["no blocks were mined"],
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["miner_main_blocks"] = {str(k): v for k, v in sorted(self.miner_main_blocks.items())}
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        d = dict(d)
        d["miner_main_blocks"] = {int(k): v for k, v in d.get("miner_main_blocks", {}).items()}
        for key in ("avg_block_interval_minutes", "d50_seconds", "d90_seconds",
                    "d50_median_seconds", "d90_median_seconds"):
            if d.get(key) is None:
                d[key] = math.nan
        return cls(**d)

    def csv_row(self) -> dict:
        row = self.to_dict()
        row.pop("miner_main_blocks")
        row["warnings"] = "; ".join(self.warnings)
        return row


CSV_FIELDS = [f for f in MetricsReport.__dataclass_fields__ if f != "miner_main_blocks"]


def csv_text(rows: Iterable[dict], extra_fields: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[*extra_fields, *CSV_FIELDS], lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def mined_blocks(events: Iterable[Event]) -> dict[int, MinedBlock]:
    out = {}
    for ev in events:
        if ev.event_kind == "BLOCK_MINED":
            x = ev.extra
            out[ev.item_id] = MinedBlock(
                ev.item_id, x["parent"], x["height"], ev.node_id, ev.step,
                x.get("tx_count", 0), x.get("size_bytes", 0),
            )
    return out


def block_arrivals(events: Iterable[Event]) -> list[BlockArrival]:
    """First arrival of each block at each node; mining counts as arrival at the miner."""
    seen = set()
    out = []
    for ev in events:
        if ev.event_kind in ("BLOCK_MINED", "BLOCK_RECEIVED"):
            key = (ev.item_id, ev.node_id)
            if key not in seen:
                seen.add(key)
                out.append(BlockArrival(ev.item_id, ev.node_id, ev.step))
    return out


def _best_tip(blocks: dict[int, MinedBlock]) -> int:
    if not blocks:
        return GENESIS_ID
    best = min(blocks.values(), key=lambda b: (-b.height, b.created_step, b.block_id))
    return best.block_id


def main_chain(events: Iterable[Event]) -> list[int]:
    """Block ids from genesis to the globally best tip (highest, then earliest mined, then smallest id)."""
    blocks = mined_blocks(events)
    chain = []
    cur = _best_tip(blocks)
    while cur != GENESIS_ID:
        chain.append(cur)
        cur = blocks[cur].parent_id
    chain.append(GENESIS_ID)
    chain.reverse()
    return chain


def propagation_delays(
    blocks: dict[int, MinedBlock], arrivals: list[BlockArrival], node_count: int, percent: float
) -> tuple[list[int], int]:
    """Steps for each block to reach ``ceil(percent% * node_count)`` nodes.

    Returns the delays of blocks that reached the threshold and the number
    that did not.
    """
    need = max(1, math.ceil(percent / 100 * node_count))
    per_block: dict[int, list[int]] = {}
    for a in arrivals:
        per_block.setdefault(a.block_id, []).append(a.step)
    delays = []
    unreached = 0
    for bid, blk in blocks.items():
        steps = sorted(per_block.get(bid, ()))
        if len(steps) >= need:
            delays.append(steps[need - 1] - blk.created_step)
        else:
            unreached += 1
    return delays, unreached


def race_statistics(events: Iterable[Event], attacker_id: int) -> tuple[int, float | None]:
    """Count tie races between a published attacker block and an honest sibling.

    A race is settled by the first block mined on top of either sibling. If
    that block is honest, it counts towards gamma when it builds on the
    attacker's block. Races the attacker settles itself are not counted.
    """
    events = list(events)
    blocks = mined_blocks(events)
    published: dict[int, int] = {}
    for ev in events:
        if (
            ev.event_kind == "INV_SENT" and ev.node_id == attacker_id
            and ev.item_id in blocks and blocks[ev.item_id].miner_id == attacker_id
        ):
            published.setdefault(ev.item_id, ev.step)
    children: dict[int, list[MinedBlock]] = {}
    for b in blocks.values():
        children.setdefault(b.parent_id, []).append(b)
    races = 0
    wins = 0
    decided = 0
    for aid, pub_step in sorted(published.items()):
        a = blocks[aid]
        siblings = [b for b in children.get(a.parent_id, ()) if b.miner_id != attacker_id]
        if not siblings:
            continue
        # released from a lead of two or more: not a tie
        if any(c.miner_id == attacker_id and c.created_step < pub_step for c in children.get(aid, ())):
            continue
        races += 1
        candidates = list(children.get(aid, ()))
        for s in siblings:
            candidates.extend(children.get(s.block_id, ()))
        if not candidates:
            continue
        first = min(candidates, key=lambda b: (b.created_step, b.block_id))
        if first.miner_id == attacker_id:
            continue
        decided += 1
        wins += first.parent_id == aid
    return races, (wins / decided if decided else None)


def compute_metrics(
    events: Iterable[Event],
    config,
    attacker_id: int | None = None,
) -> MetricsReport:
    """Block interval, stale rate, propagation delays and throughput.

    ``config`` supplies ``seconds_per_step``, ``total_steps`` and
    ``node_count``. Raises :class:`EmptyRun` if no block was mined.
    """
    events = list(events)
    sps = config.seconds_per_step
    node_count = config.node_count
    duration = config.total_steps * sps
    blocks = mined_blocks(events)
    if not blocks:
        raise EmptyRun("no blocks were mined")

    chain = main_chain(events)
    main = [blocks[b] for b in chain[1:]]
    created = [b.created_step for b in main]
    intervals = [b - a for a, b in zip(created, created[1:])]
    interval_min = fmean(intervals) * sps / 60 if intervals else math.nan

    blocks_total = len(blocks)
    blocks_main = len(main)
    stale = blocks_total - blocks_main
    main_tx = sum(b.tx_count for b in main)

    arrivals = block_arrivals(events)
    report = MetricsReport(
        avg_block_interval_minutes=interval_min,
        stale_rate_percent=100.0 * stale / blocks_total,
        d50_seconds=math.nan,
        d90_seconds=math.nan,
        tps=main_tx / duration,
        blocks_total=blocks_total,
        blocks_main=blocks_main,
        main_chain_height=len(chain) - 1,
        stale_blocks=stale,
        node_count=node_count,
        duration_seconds=duration,
        main_chain_tx=main_tx,
    )
    for p in PERCENTILES:
        delays, unreached = propagation_delays(blocks, arrivals, node_count, p)
        if delays:
            setattr(report, f"d{p}_seconds", fmean(delays) * sps)
            setattr(report, f"d{p}_median_seconds", median(delays) * sps)
        setattr(report, f"d{p}_blocks_measured", len(delays))
        setattr(report, f"d{p}_blocks_unreached", unreached)

    counts: dict[int, int] = {}
    for b in main:
        counts[b.miner_id] = counts.get(b.miner_id, 0) + 1
    report.miner_main_blocks = counts
    if attacker_id is not None:
        report.attacker_id = attacker_id
        report.attacker_share = counts.get(attacker_id, 0) / blocks_main if blocks_main else 0.0
        report.races, report.race_gamma = race_statistics(events, attacker_id)
    return report
