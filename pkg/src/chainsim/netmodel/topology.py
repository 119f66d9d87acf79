"""Overlay construction and connectivity checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import networkx as nx

from chainsim.netmodel.expr import eval_predicate, parse_topology_expr
from chainsim.rng import RngStream

KINDS = ("predicate_expression", "explicit_edges", "uniform_random_k", "ring", "full_mesh")

_REQUIRED = {
    "predicate_expression": {"expression_text"},
    "explicit_edges": {"edges"},
    "uniform_random_k": {"k"},
    "ring": set(),
    "full_mesh": set(),
}


class InvalidSpec(ValueError):
    pass


class NodeInfo(NamedTuple):
    id: int
    region: str


Edge = tuple[int, int]


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    expression_text: str | None = None
    edges: tuple[Edge, ...] | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown topology kind {self.kind!r}; expected one of {KINDS}")
        present = {
            name
            for name in ("expression_text", "edges", "k")
            if getattr(self, name) is not None
        }
        required = _REQUIRED[self.kind]
        if present != required:
            missing = required - present
            extra = present - required
            parts = []
            if missing:
                parts.append(f"missing {sorted(missing)}")
            if extra:
                parts.append(f"unexpected {sorted(extra)}")
            raise InvalidSpec(f"topology kind {self.kind!r}: {', '.join(parts)}")
        if self.kind == "uniform_random_k" and self.k < 1:
            raise InvalidSpec("k must be a positive integer")


def _norm(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def build_topology(nodes: Sequence[NodeInfo], spec: TopologySpec, rng: RngStream | None = None) -> set[Edge]:
    """Undirected simple edge set ``{(i, j), i < j}`` over node ids ``0..N-1``."""
    n = len(nodes)
    if [node.id for node in nodes] != list(range(n)):
        raise InvalidSpec("node ids must be 0..N-1 in order")
    edges: set[Edge] = set()

    if spec.kind == "full_mesh":
        edges = {(i, j) for i in range(n) for j in range(i + 1, n)}
    elif spec.kind == "ring":
        if n >= 2:
            edges = {_norm(i, (i + 1) % n) for i in range(n)}
    elif spec.kind == "explicit_edges":
        for i, j in spec.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidSpec(f"edge ({i}, {j}) refers to a missing node")
            if i != j:
                edges.add(_norm(i, j))
    elif spec.kind == "uniform_random_k":
        if spec.k >= n:
            raise InvalidSpec(f"k must be < node count ({spec.k} >= {n})")
        if rng is None:
            raise InvalidSpec("uniform_random_k needs a random stream")
        gen = rng.generator
        for i in range(n):
            # choose among the n-1 others, then shift past i
            for c in gen.choice(n - 1, size=spec.k, replace=False):
                j = int(c) + (1 if c >= i else 0)
                edges.add(_norm(i, j))
    elif spec.kind == "predicate_expression":
        ast = parse_topology_expr(spec.expression_text)
        for a in range(n):
            for b in range(a + 1, n):
                if eval_predicate(ast, nodes[a], nodes[b]) or eval_predicate(ast, nodes[b], nodes[a]):
                    edges.add((a, b))
    return edges


def adjacency(edges, n: int) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for i, j in sorted(edges):
        adj[i].append(j)
        adj[j].append(i)
    return adj


@dataclass(frozen=True)
class Connectivity:
    connected: bool
    components: int


def check_connectivity(edges, n: int) -> Connectivity:
    """Disconnected overlays are allowed; callers report them as warnings."""
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    comps = nx.number_connected_components(g) if n else 0
    return Connectivity(connected=comps <= 1, components=comps)
