from chainsim.bitcoin.blocks import (
    GENESIS,
    GENESIS_ID,
    GETDATA_BYTES,
    HEADER_BYTES,
    INV_BYTES,
    Block,
    GetDataMsg,
    InvalidParams,
    InvMsg,
    MinerParams,
    ProtocolParams,
    Transaction,
    create_block,
    mining_probability,
    sample_transactions,
)
from chainsim.bitcoin.chain import ChainView, choose_tip
from chainsim.bitcoin.miner import Miner, SelfishMiner
from chainsim.bitcoin.selfish import profitability_threshold, selfish_relative_revenue

__all__ = [
    "GENESIS",
    "GENESIS_ID",
    "GETDATA_BYTES",
    "HEADER_BYTES",
    "INV_BYTES",
    "Block",
    "ChainView",
    "GetDataMsg",
    "InvMsg",
    "InvalidParams",
    "Miner",
    "MinerParams",
    "ProtocolParams",
    "SelfishMiner",
    "Transaction",
    "choose_tip",
    "create_block",
    "mining_probability",
    "profitability_threshold",
    "sample_transactions",
    "selfish_relative_revenue",
]
