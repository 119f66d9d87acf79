from chainsim.netmodel.expr import EvalError, ParseError, eval_predicate, parse_topology_expr, to_text
from chainsim.netmodel.regions import (
    LatencyMatrix,
    Region,
    RegionDataError,
    RegionDataset,
    UnknownRegion,
    compute_delay_steps,
    load_regions,
)
from chainsim.netmodel.topology import (
    Connectivity,
    InvalidSpec,
    NodeInfo,
    TopologySpec,
    adjacency,
    build_topology,
    check_connectivity,
)

__all__ = [
    "Connectivity",
    "EvalError",
    "InvalidSpec",
    "LatencyMatrix",
    "NodeInfo",
    "ParseError",
    "Region",
    "RegionDataError",
    "RegionDataset",
    "TopologySpec",
    "UnknownRegion",
    "adjacency",
    "build_topology",
    "check_connectivity",
    "compute_delay_steps",
    "eval_predicate",
    "load_regions",
    "parse_topology_expr",
    "to_text",
]
