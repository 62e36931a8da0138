import itertools

import pytest

from revdirichlet.errors import BudgetExceeded, NotNullDivergence, UnknownEdge
from revdirichlet.flows import (
    add,
    decompose_into_cycles,
    divergence,
    enumerate_null_flows,
    flow_from_json,
    flow_to_json,
    indicator,
    is_null_divergence,
)
from revdirichlet.graph import complete_graph, cycle_graph, is_simple_cycle


def brute_null_flows(g, max_total):
    """Every labeling with total <= max_total, filtered by zero divergence computed from scratch."""
    m = len(g.edges)
    out = set()
    # every labeling of total t is a multiset of t edges
    labelings = itertools.chain.from_iterable(
        itertools.combinations_with_replacement(range(m), t) for t in range(max_total + 1))
    for picks in labelings:
        vec = tuple(picks.count(i) for i in range(m))
        net = {v: 0 for v in g.vertices}
        for (x, y), n in zip(g.edges, vec):
            net[x] += n
            net[y] -= n
        if not any(net.values()):
            out.add(vec)
    return out


def test_divergence_examples(c3, k3):
    assert set(divergence(c3, indicator(c3, "abca")).values()) == {0}
    assert divergence(k3, {("a", "b"): 1}) == {"a": 1, "b": -1, "c": 0}
    two = add(indicator(k3, "abca"), indicator(k3, "acba"))
    assert is_null_divergence(k3, two)
    with pytest.raises(UnknownEdge):
        divergence(c3, {("a", "c"): 1})


def test_c3_counts(c3):
    assert enumerate_null_flows(c3, 3) == [(0, 0, 0), (1, 1, 1)]
    assert enumerate_null_flows(c3, 0) == [(0, 0, 0)]


def test_zero_budget_gives_zero_flow(k4):
    assert enumerate_null_flows(k4, 0) == [(0,) * 12]


@pytest.mark.parametrize("name", ["K3", "K4", "C3"])
def test_enumeration_matches_brute_force(name):
    g = {"K3": complete_graph("abc"), "K4": complete_graph("abcd"), "C3": cycle_graph("abc")}[name]
    for t in range(6):
        flows = enumerate_null_flows(g, t)
        assert len(flows) == len(set(flows))
        assert set(flows) == brute_null_flows(g, t)


def test_recorded_counts(k3):
    # brute-force counts on K3 for totals 0..6
    assert [len(enumerate_null_flows(k3, t)) for t in range(7)] == [1, 1, 4, 6, 12, 18, 30]


def test_order_is_graded_and_prefix_closed(k3):
    big = enumerate_null_flows(k3, 6)
    assert big == sorted(big, key=lambda f: (sum(f), f))
    for t in range(6):
        small = enumerate_null_flows(k3, t)
        assert big[: len(small)] == small


def test_budget_cap(k4):
    with pytest.raises(BudgetExceeded):
        enumerate_null_flows(k4, 6, max_flows=100)


def test_closed_under_addition(k3):
    flows = enumerate_null_flows(k3, 6)
    present = set(flows)
    for f1 in flows:
        for f2 in flows:
            if sum(f1) + sum(f2) <= 6:
                assert add(f1, f2) in present


@pytest.mark.parametrize("name", ["K3", "K4", "C3"])
def test_decomposition_round_trip(name):
    g = {"K3": complete_graph("abc"), "K4": complete_graph("abcd"), "C3": cycle_graph("abc")}[name]
    for flow in enumerate_null_flows(g, 6 if name != "K4" else 5):
        cycles = decompose_into_cycles(g, flow)
        assert all(is_simple_cycle(g, c) for c in cycles)
        total = (0,) * len(g.edges)
        for c in cycles:
            total = add(total, indicator(g, c))
        assert total == flow


def test_decomposition_examples(c3, k3):
    assert decompose_into_cycles(c3, indicator(c3, "abca")) == [("a", "b", "c", "a")]
    assert decompose_into_cycles(k3, (0,) * 6) == []
    two = add(indicator(k3, "aba"), indicator(k3, "aca"))
    assert sorted(decompose_into_cycles(k3, two)) == [("a", "b", "a"), ("a", "c", "a")]
    with pytest.raises(NotNullDivergence):
        decompose_into_cycles(k3, {("a", "b"): 1})


def test_flow_json(k3):
    flow = add(indicator(k3, "bcb"), (0,) * 6)
    assert flow_to_json(k3, flow) == {"b->c": 1, "c->b": 1}
    assert flow_from_json(k3, {"b->c": 1, "c->b": 1}) == flow
    with pytest.raises(UnknownEdge):
        flow_from_json(k3, {"a->a": 1})
    with pytest.raises(ValueError):
        flow_from_json(k3, {"a->b": -1})
