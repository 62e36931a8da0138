"""Nonnegative integer edge labelings with zero divergence.

A flow is stored as a tuple of ints aligned with ``g.edges``. Functions also
accept a mapping ``{edge: count}`` with omitted edges meaning 0.
"""

from collections.abc import Mapping

from .errors import BudgetExceeded, NotNullDivergence, UnknownEdge

DEFAULT_MAX_FLOWS = 1_000_000


def as_vector(g, flow):
    if isinstance(flow, Mapping):
        vec = [0] * len(g.edges)
        for e, v in flow.items():
            e = tuple(e)
            if not g.has_edge(*e):
                raise UnknownEdge(f"{e!r} is not an edge of the graph")
            vec[g.edge_index(e)] = int(v)
    else:
        vec = [int(v) for v in flow]
        if len(vec) != len(g.edges):
            raise UnknownEdge(f"flow has {len(vec)} entries, graph has {len(g.edges)} edges")
    if any(v < 0 for v in vec):
        raise ValueError("flow values must be nonnegative")
    return tuple(vec)


def as_mapping(g, flow):
    """Sparse ``{edge: count}`` view, zero entries dropped."""
    return {e: v for e, v in zip(g.edges, as_vector(g, flow)) if v}


def total(flow):
    return sum(flow.values()) if isinstance(flow, Mapping) else sum(flow)


def divergence(g, flow):
    """Per-vertex out-flow minus in-flow."""
    vec = as_vector(g, flow)
    div = {v: 0 for v in g.vertices}
    for (x, y), n in zip(g.edges, vec):
        div[x] += n
        div[y] -= n
    return div


def is_null_divergence(g, flow):
    return not any(divergence(g, flow).values())


def indicator(g, path):
    """Edge-count vector of a path or cycle given as a vertex sequence."""
    vec = [0] * len(g.edges)
    for e in zip(path, path[1:]):
        if not g.has_edge(*e):
            raise UnknownEdge(f"{e!r} is not an edge of the graph")
        vec[g.edge_index(e)] += 1
    return tuple(vec)


def add(f1, f2):
    return tuple(a + b for a, b in zip(f1, f2))


def enumerate_null_flows(g, max_total, max_flows=DEFAULT_MAX_FLOWS):
    """All null-divergence flows with total <= ``max_total``.

    Ordered by total, then lexicographically in the canonical edge order, so
    the list for a smaller budget is always a prefix of the list for a
    larger one.

    Depth-first over edges in canonical order. A branch is cut when a vertex
    whose incident edges are all assigned has nonzero divergence, or when the
    positive divergence left to cancel exceeds the remaining budget.
    """
    if max_total < 0:
        raise ValueError("max_total must be nonnegative")
    edges = g.edges
    m = len(edges)
    last = {}
    for i, (x, y) in enumerate(edges):
        last[x] = i
        last[y] = i
    closes = [[] for _ in range(m)]
    for v, i in last.items():
        closes[i].append(v)

    div = {v: 0 for v in g.vertices}
    values = [0] * m
    result = []

    def excess():
        return sum(d for d in div.values() if d > 0)

    def visit(i, budget):
        if i == m:
            result.append(tuple(values))
            if len(result) > max_flows:
                raise BudgetExceeded(f"more than {max_flows} null-divergence flows")
            return
        x, y = edges[i]
        for n in range(budget + 1):
            values[i] = n
            div[x] += n
            div[y] -= n
            ok = all(div[v] == 0 for v in closes[i]) and excess() <= budget - n
            if ok:
                visit(i + 1, budget - n)
            div[x] -= n
            div[y] += n
        values[i] = 0

    visit(0, max_total)
    result.sort(key=lambda f: (sum(f), f))
    return result


def decompose_into_cycles(g, flow):
    """Split a null-divergence flow into simple cycles whose indicators sum to it.

    Greedy: walk from the smallest vertex with positive out-flow along the
    smallest-labelled positive edge until a vertex repeats, peel off that
    cycle, repeat.
    """
    residual = list(as_vector(g, flow))
    if any(divergence(g, residual).values()):
        raise NotNullDivergence("flow does not have null divergence")
    cycles = []
    while any(residual):
        start = next(
            v for v in g.vertices
            if any(residual[g.edge_index(e)] for e in g.out_edges(v))
        )
        walk = [start]
        pos = {start: 0}
        while True:
            u = walk[-1]
            e = next(e for e in g.out_edges(u) if residual[g.edge_index(e)] > 0)
            w = e[1]
            if w in pos:
                cycle = tuple(walk[pos[w]:]) + (w,)
                break
            pos[w] = len(walk)
            walk.append(w)
        for e in zip(cycle, cycle[1:]):
            residual[g.edge_index(e)] -= 1
        cycles.append(cycle)
    return cycles


def flow_to_json(g, flow):
    return {f"{x}->{y}": v for (x, y), v in zip(g.edges, as_vector(g, flow)) if v}


def parse_edge_key(g, key):
    """Resolve an ``"a->b"`` key against ``g`` (vertex ids compared as strings)."""
    if not isinstance(key, str) or key.count("->") != 1:
        raise ValueError(f"edge key {key!r} must look like 'a->b'")
    a, b = key.split("->")
    by_name = {str(v): v for v in g.vertices}
    if a not in by_name or b not in by_name or not g.has_edge(by_name[a], by_name[b]):
        raise UnknownEdge(f"{key!r} is not an edge of the graph")
    return (by_name[a], by_name[b])


def flow_from_json(g, data):
    if not isinstance(data, dict):
        raise ValueError("flow JSON must be an object")
    out = {}
    for key, v in data.items():
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ValueError(f"flow value for {key!r} must be a nonnegative integer")
        out[parse_edge_key(g, key)] = v
    return as_vector(g, out)
