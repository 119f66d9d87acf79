"""Bitcoin data layer: blocks, announce/request messages and mining odds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chainsim.engine import Item
from chainsim.rng import RngStream

GENESIS_ID = 0
HEADER_BYTES = 80
INV_BYTES = 61
GETDATA_BYTES = 61


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    block_interval_seconds: float = 600.0
    header_bytes: int = HEADER_BYTES
    inv_bytes: int = INV_BYTES
    getdata_bytes: int = GETDATA_BYTES
    tx_count_mean: float = 2104.72
    tx_count_std: float = 236.63
    tx_size_mean: float = 615.32
    tx_size_std: float = 89.43


@dataclass(frozen=True)
class Transaction:
    size_bytes: int

    def __post_init__(self):
        if self.size_bytes < 1:
            raise ValueError("transaction size must be >= 1 byte")


@dataclass(frozen=True)
class Block(Item):
    parent_id: int
    height: int
    miner_id: int
    tx_count: int
    total_tx_bytes: int


GENESIS = Block(
    item_id=GENESIS_ID,
    origin_node=-1,
    created_step=0,
    size_bytes=HEADER_BYTES,
    parent_id=-1,
    height=0,
    miner_id=-1,
    tx_count=0,
    total_tx_bytes=0,
)


@dataclass(frozen=True)
class InvMsg(Item):
    block_id: int


@dataclass(frozen=True)
class GetDataMsg(Item):
    block_id: int


@dataclass(frozen=True)
class MinerParams:
    mine_power: float
    total_mine_power: float
    block_interval_steps: int


def mining_probability(params: MinerParams) -> float:
    """Per-step chance that this miner finds a block.

    Scales so miners win in proportion to their power and the network as a
    whole averages one block per ``block_interval_steps``.
    """
    if params.mine_power < 0:
        raise InvalidParams("mine_power must be >= 0")
    if not params.total_mine_power > 0:
        raise InvalidParams("total_mine_power must be > 0")
    if params.block_interval_steps < 1:
        raise InvalidParams("block_interval_steps must be >= 1")
    if params.mine_power > params.total_mine_power * (1 + 1e-12):
        raise InvalidParams("mine_power exceeds total_mine_power")
    p = params.mine_power / (params.block_interval_steps * params.total_mine_power)
    if p > 1:
        raise InvalidParams(f"mining probability {p} > 1; block interval too short")
    return p


def sample_transactions(
    rng_count: RngStream, rng_size: RngStream, protocol: ProtocolParams
) -> tuple[int, int]:
    """Draw (tx_count, total_tx_bytes) for one block.

    Normal draws are rounded and clamped: counts to >= 0, sizes to >= 1 byte.
    """
    count = max(0, int(np.rint(rng_count.generator.normal(protocol.tx_count_mean, protocol.tx_count_std))))
    if count == 0:
        return 0, 0
    sizes = np.rint(rng_size.generator.normal(protocol.tx_size_mean, protocol.tx_size_std, count))
    np.maximum(sizes, 1, out=sizes)
    return count, int(sizes.sum())


def create_block(
    item_id: int,
    miner_id: int,
    parent: Block,
    step: int,
    rng_count: RngStream,
    rng_size: RngStream,
    protocol: ProtocolParams = ProtocolParams(),
) -> Block:
    tx_count, tx_bytes = sample_transactions(rng_count, rng_size, protocol)
    return Block(
        item_id=item_id,
        origin_node=miner_id,
        created_step=step,
        size_bytes=protocol.header_bytes + tx_bytes,
        parent_id=parent.item_id,
        height=parent.height + 1,
        miner_id=miner_id,
        tx_count=tx_count,
        total_tx_bytes=tx_bytes,
    )
