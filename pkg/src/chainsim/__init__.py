"""Discrete-step blockchain network simulator."""
from chainsim.config import ConfigError, SimConfig, load_config
from chainsim.engine import Engine, EventLog, Item, Node, Packet
from chainsim.kernels import BACKEND as KERNEL_BACKEND
from chainsim.metrics import MetricsReport, compute_metrics, main_chain
from chainsim.rng import derive_rng
from chainsim.simulation import build_world, run

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "ConfigError",
    "Engine",
    "EventLog",
    "Item",
    "MetricsReport",
    "Node",
    "Packet",
    "SimConfig",
    "build_world",
    "compute_metrics",
    "derive_rng",
    "load_config",
    "main_chain",
    "run",
]
