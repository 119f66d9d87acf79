import math
from fractions import Fraction
from itertools import permutations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsim.netmodel import (
    EvalError,
    InvalidSpec,
    LatencyMatrix,
    NodeInfo,
    ParseError,
    Region,
    RegionDataError,
    TopologySpec,
    UnknownRegion,
    build_topology,
    check_connectivity,
    compute_delay_steps,
    eval_predicate,
    load_regions,
    parse_topology_expr,
    to_text,
)
from chainsim.netmodel.expr import BoolOp
from chainsim.netmodel.regions import RegionDataset
from chainsim.rng import derive_rng

RING = "abs(n1.id - n2.id) == 1 or abs(n1.id - n2.id) == 9"


def _pair(latency_ms, up_a, down_b):
    a = Region("A", download_mbps=100.0, upload_mbps=up_a)
    b = Region("B", download_mbps=down_b, upload_mbps=100.0)
    lat = LatencyMatrix.from_nested({"A": {"A": 0, "B": latency_ms}, "B": {"B": 0}})
    return a, b, lat


# -- delay ------------------------------------------------------------------


def test_delay_example_three_steps():
    # 0.1 s + 1e6 B / (5 MB/s) = 0.3 s -> 3 steps of 0.1 s
    a, b, lat = _pair(100, 5.0, 10.0)
    expected = math.ceil((Fraction(100, 1000) + Fraction(1_000_000, 5_000_000)) / Fraction(1, 10))
    assert expected == 3
    assert compute_delay_steps(a, b, lat, 1_000_000, 0.1) == 3


def test_delay_zero_clamped():
    a, b, lat = _pair(0, 5.0, 10.0)
    assert compute_delay_steps(a, b, lat, 0, 0.1) == 1


def test_delay_small_message():
    # 0.05 s + 61 B / 8 MB/s = 0.050007625 s -> 1 step
    a, b, lat = _pair(50, 8.0, 8.0)
    assert (Fraction(50, 1000) + Fraction(61, 8_000_000)) == Fraction(50007625, 10**9)
    assert compute_delay_steps(a, b, lat, 61, 0.1) == 1


def test_delay_uses_sender_upload_and_receiver_download():
    a, b, lat = _pair(0, 2.0, 50.0)
    # bottleneck is A's upload: 1e6 / 2e6 = 0.5 s
    assert compute_delay_steps(a, b, lat, 1_000_000, 0.1) == 5
    a, b, lat = _pair(0, 50.0, 4.0)
    assert compute_delay_steps(a, b, lat, 1_000_000, 0.1) == 3  # 0.25 s -> ceil(2.5)


def test_delay_unknown_region():
    a, _, lat = _pair(10, 5.0, 5.0)
    with pytest.raises(UnknownRegion):
        compute_delay_steps(a, Region("Z", 1.0, 1.0), lat, 10, 0.1)


@settings(max_examples=200)
@given(
    st.integers(0, 500), st.integers(0, 500),
    st.integers(0, 3_000_000), st.integers(0, 3_000_000),
    st.floats(0.5, 50), st.floats(0.5, 50),
    st.sampled_from([0.01, 0.1, 1.0]),
)
def test_delay_monotone(l1, l2, s1, s2, bw1, bw2, sps):
    lo_l, hi_l = sorted((l1, l2))
    lo_s, hi_s = sorted((s1, s2))
    lo_b, hi_b = sorted((bw1, bw2))

    def d(lat, size, bw):
        a, b, m = _pair(lat, bw, bw)
        return compute_delay_steps(a, b, m, size, sps)

    assert d(lo_l, lo_s, hi_b) <= d(hi_l, lo_s, hi_b)
    assert d(lo_l, lo_s, hi_b) <= d(lo_l, hi_s, hi_b)
    assert d(lo_l, hi_s, hi_b) <= d(lo_l, hi_s, lo_b)
    assert d(lo_l, lo_s, hi_b) >= 1


def test_region_validation():
    with pytest.raises(RegionDataError):
        Region("x", 0.0, 1.0)
    with pytest.raises(RegionDataError):
        RegionDataset({"x": Region("x", 1.0, 1.0)}, LatencyMatrix({}))
    with pytest.raises(RegionDataError):
        RegionDataset(
            {"x": Region("x", 1.0, 1.0, mine_power_share=0.7), "y": Region("y", 1.0, 1.0, mine_power_share=0.7)},
            LatencyMatrix.from_nested({"x": {"x": 1, "y": 1}, "y": {"y": 1}}),
        )


def test_builtin_dataset():
    from importlib import resources

    ds = load_regions(resources.files("chainsim.data").joinpath("regions9.yaml"))
    assert len(ds.regions) == 9
    assert 0.9 < sum(r.mine_power_share for r in ds.regions.values()) <= 1.0
    for a in ds.regions:
        for b in ds.regions:
            assert ds.latency.get(a, b) == ds.latency.get(b, a)


def test_asymmetric_latency_kept(write_yaml):
    path = write_yaml("r.yaml", {
        "regions": [{"region_id": "x", "download_mbps": 1, "upload_mbps": 1},
                    {"region_id": "y", "download_mbps": 1, "upload_mbps": 1}],
        "latency_ms": {"x": {"x": 1, "y": 10}, "y": {"y": 1, "x": 20}},
    })
    ds = load_regions(path)
    assert ds.latency.get("x", "y") == 10
    assert ds.latency.get("y", "x") == 20


# -- expressions ------------------------------------------------------------


def test_parse_ring_expression():
    ast = parse_topology_expr(RING)
    assert isinstance(ast, BoolOp) and ast.op == "or"


def test_parse_error_at_end():
    with pytest.raises(ParseError) as exc:
        parse_topology_expr("n1.id <")
    assert exc.value.position == len("n1.id <")
    assert "n1" in exc.value.expected


@pytest.mark.parametrize("text", ["(n1.id + n2.id) % 2 == 0", "not n1.region == 'eu' and n2.id >= 3",
                                  "-n1.id * 2 / 3 != n2.id", "abs(  n1.id-n2.id )<=2"])
def test_parse_valid(text):
    parse_topology_expr(text)


@pytest.mark.parametrize("text", ["", "n1.", "n3.id == 1", "n1.id == (2", "abs n1.id", "n1.id == 1 2", "n1.id @ 2"])
def test_parse_invalid(text):
    with pytest.raises(ParseError):
        parse_topology_expr(text)


def test_eval_ring():
    ast = parse_topology_expr(RING)
    assert eval_predicate(ast, NodeInfo(0, "r"), NodeInfo(9, "r")) is True
    assert eval_predicate(ast, NodeInfo(0, "r"), NodeInfo(5, "r")) is False


def test_eval_division_by_zero():
    ast = parse_topology_expr("n1.id % 0 == 0")
    with pytest.raises(EvalError):
        eval_predicate(ast, NodeInfo(1, "r"), NodeInfo(2, "r"))
    with pytest.raises(EvalError):
        eval_predicate(parse_topology_expr("n1.id / (n2.id - n2.id) == 1"), NodeInfo(1, "r"), NodeInfo(2, "r"))


def test_eval_regions_and_division():
    ast = parse_topology_expr("n1.region == n2.region or n1.region == 'hub'")
    assert eval_predicate(ast, NodeInfo(0, "eu"), NodeInfo(1, "eu"))
    assert eval_predicate(ast, NodeInfo(0, "hub"), NodeInfo(1, "eu"))
    assert not eval_predicate(ast, NodeInfo(0, "us"), NodeInfo(1, "eu"))
    assert eval_predicate(parse_topology_expr("n1.id / 2 == 3 / 2"), NodeInfo(3, "a"), NodeInfo(0, "a"))
    with pytest.raises(EvalError):
        eval_predicate(parse_topology_expr("n1.region < 3"), NodeInfo(3, "a"), NodeInfo(0, "a"))


_atoms = st.sampled_from(["n1.id", "n2.id", "1", "2", "7", "0"])


def _exprs():
    arith = st.recursive(
        _atoms,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from(["+", "-", "*", "%"]), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
            inner.map(lambda e: f"abs({e})"),
            inner.map(lambda e: f"-{e}"),
        ),
        max_leaves=6,
    )
    cmp = st.tuples(arith, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), arith).map(" ".join)
    return st.recursive(
        cmp,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from(["and", "or"]), inner).map(lambda t: f"{t[0]} {t[1]} {t[2]}"),
            inner.map(lambda e: f"not ({e})"),
        ),
        max_leaves=4,
    )


NODES20 = [NodeInfo(i, "r") for i in range(20)]


def _evaluate_all(ast):
    out = []
    for a, b in permutations(NODES20, 2):
        try:
            out.append(eval_predicate(ast, a, b))
        except EvalError:
            out.append("err")
    return out


@settings(max_examples=60, deadline=None)
@given(_exprs())
def test_pretty_print_roundtrip(text):
    ast = parse_topology_expr(text)
    again = parse_topology_expr(to_text(ast))
    assert again == ast
    assert _evaluate_all(again) == _evaluate_all(ast)


# -- topology ---------------------------------------------------------------


def _nodes(n):
    return [NodeInfo(i, "r") for i in range(n)]


def _graph(edges, n):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return g


def test_predicate_ring_is_ring():
    edges = build_topology(_nodes(10), TopologySpec("predicate_expression", expression_text=RING))
    g = _graph(edges, 10)
    assert all(d == 2 for _, d in g.degree())
    ring = _graph(build_topology(_nodes(10), TopologySpec("ring")), 10)
    assert nx.is_isomorphic(g, ring)
    assert check_connectivity(edges, 10).connected


def test_asymmetric_predicate_symmetrized():
    edges = build_topology(_nodes(4), TopologySpec("predicate_expression", expression_text="n2.id == n1.id + 1"))
    assert edges == {(0, 1), (1, 2), (2, 3)}


def test_full_mesh_edges():
    assert len(build_topology(_nodes(9), TopologySpec("full_mesh"))) == 36


def test_explicit_edges_cleaned():
    spec = TopologySpec("explicit_edges", edges=((0, 1), (1, 0), (2, 2), (3, 1)))
    assert build_topology(_nodes(4), spec) == {(0, 1), (1, 3)}
    with pytest.raises(InvalidSpec):
        build_topology(_nodes(2), TopologySpec("explicit_edges", edges=((0, 5),)))


@pytest.mark.parametrize("seed", range(5))
def test_uniform_random_k(seed):
    edges = build_topology(_nodes(9), TopologySpec("uniform_random_k", k=2), derive_rng(seed, None, "topology"))
    g = _graph(edges, 9)
    assert min(d for _, d in g.degree()) >= 2
    assert nx.number_of_selfloops(g) == 0
    assert all(i < j for i, j in edges)


def test_uniform_random_k_deterministic():
    spec = TopologySpec("uniform_random_k", k=3)
    a = build_topology(_nodes(20), spec, derive_rng(1, None, "topology"))
    b = build_topology(_nodes(20), spec, derive_rng(1, None, "topology"))
    c = build_topology(_nodes(20), spec, derive_rng(2, None, "topology"))
    assert a == b and a != c


def test_k_too_large():
    with pytest.raises(InvalidSpec):
        build_topology(_nodes(9), TopologySpec("uniform_random_k", k=9), derive_rng(1, None, "t"))


def test_spec_field_requirements():
    with pytest.raises(InvalidSpec):
        TopologySpec("uniform_random_k")
    with pytest.raises(InvalidSpec):
        TopologySpec("ring", k=3)
    with pytest.raises(InvalidSpec):
        TopologySpec("star")


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 25), st.sampled_from(["ring", "full_mesh", "rand", "pred"]), st.integers(0, 1000))
def test_always_simple_undirected(n, kind, seed):
    if kind == "rand":
        if n < 2:
            return
        spec = TopologySpec("uniform_random_k", k=min(3, n - 1))
    elif kind == "pred":
        spec = TopologySpec("predicate_expression", expression_text="(n1.id * 7 + n2.id) % 3 == 0")
    else:
        spec = TopologySpec(kind)
    edges = build_topology(_nodes(n), spec, derive_rng(seed, None, "topology"))
    assert all(0 <= i < j < n for i, j in edges)


def test_connectivity():
    ring = build_topology(_nodes(10), TopologySpec("ring"))
    assert check_connectivity(ring, 10).components == 1
    c = check_connectivity({(0, 1), (2, 3)}, 4)
    assert not c.connected and c.components == 2
    c = check_connectivity(set(), 1)
    assert c.connected and c.components == 1
