"""Finite directed graphs: construction, reversal, connectivity and paths.

Vertices are strings or integers. All traversals visit neighbours in sorted
vertex order so every path-returning function is reproducible.
"""

from collections import deque
from itertools import chain

from .errors import (
    DuplicateEdge,
    EmptyVertexSet,
    GraphError,
    PreconditionViolated,
    SelfLoopRejected,
    UnknownVertex,
)


def vertex_key(v):
    """Sort key putting integers before strings, each in natural order."""
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise TypeError(f"vertex ids must be str or int, got {v!r}")
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


def edge_key(e):
    return (vertex_key(e[0]), vertex_key(e[1]))


class DirectedGraph:
    """Immutable directed graph without multiple edges.

    ``edges`` is a tuple in canonical (lexicographic) order. ``out_edges(x)``
    is E_x sorted by head, ``in_edges(x)`` is E^x sorted by tail.
    """

    __slots__ = ("_vertices", "_edges", "_edge_set", "_out", "_in", "_index")

    def __init__(self, vertices, edges):
        self._vertices = tuple(sorted(vertices, key=vertex_key))
        self._edges = tuple(sorted(edges, key=edge_key))
        self._edge_set = frozenset(self._edges)
        out = {v: [] for v in self._vertices}
        inc = {v: [] for v in self._vertices}
        for x, y in self._edges:
            out[x].append((x, y))
            inc[y].append((x, y))
        self._out = {v: tuple(es) for v, es in out.items()}
        self._in = {v: tuple(sorted(es, key=lambda e: vertex_key(e[0])))
                    for v, es in inc.items()}
        self._index = {e: i for i, e in enumerate(self._edges)}

    @property
    def vertices(self):
        return self._vertices

    @property
    def edges(self):
        return self._edges

    def __len__(self):
        return len(self._vertices)

    def __contains__(self, v):
        return v in self._out

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self):
        return hash((self._vertices, self._edges))

    def __repr__(self):
        return f"DirectedGraph(|V|={len(self._vertices)}, |E|={len(self._edges)})"

    def has_edge(self, x, y):
        return (x, y) in self._edge_set

    def edge_index(self, e):
        return self._index[e]

    def out_edges(self, x):
        return self._out[x]

    def in_edges(self, x):
        return self._in[x]

    def successors(self, x):
        return tuple(y for _, y in self._out[x])

    def predecessors(self, x):
        return tuple(y for y, _ in self._in[x])

    def has_self_loops(self):
        return any(x == y for x, y in self._edges)

    def without_vertex(self, v):
        """Graph with ``v`` and all incident edges removed."""
        return DirectedGraph(
            [u for u in self._vertices if u != v],
            [e for e in self._edges if v not in e],
        )


def build_graph(vertices, edges, allow_self_loops=True):
    vertices = list(vertices)
    if not vertices:
        raise EmptyVertexSet("a graph needs at least one vertex")
    for v in vertices:
        vertex_key(v)
    if len(set(vertices)) != len(vertices):
        raise GraphError("duplicate vertex ids")
    known = set(vertices)
    seen = set()
    for e in edges:
        x, y = e
        for v in (x, y):
            if v not in known:
                raise UnknownVertex(f"edge ({x!r}, {y!r}) uses unknown vertex {v!r}")
        if (x, y) in seen:
            raise DuplicateEdge(f"edge ({x!r}, {y!r}) given twice")
        if x == y and not allow_self_loops:
            raise SelfLoopRejected(f"self-loop at {x!r}")
        seen.add((x, y))
    return DirectedGraph(vertices, seen)


def reverse_graph(g):
    return DirectedGraph(g.vertices, [(y, x) for x, y in g.edges])


def complete_graph(labels):
    """Complete digraph on ``labels`` (every ordered pair of distinct vertices)."""
    labels = list(labels)
    return build_graph(labels, [(x, y) for x in labels for y in labels if x != y])


def cycle_graph(labels):
    labels = list(labels)
    n = len(labels)
    return build_graph(labels, [(labels[i], labels[(i + 1) % n]) for i in range(n)])


def bidirected_cycle_graph(labels):
    labels = list(labels)
    n = len(labels)
    edges = set()
    for i in range(n):
        a, b = labels[i], labels[(i + 1) % n]
        edges.add((a, b))
        edges.add((b, a))
    return build_graph(labels, edges)


def reachable_from(g, source, avoid=()):
    """Set of vertices reachable from ``source`` without entering ``avoid``."""
    avoid = set(avoid)
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.successors(u):
            if w not in seen and w not in avoid:
                seen.add(w)
                queue.append(w)
    return seen


def is_strongly_connected(g):
    if len(g) <= 1:
        return True
    root = g.vertices[0]
    if len(reachable_from(g, root)) != len(g):
        return False
    return len(reachable_from(reverse_graph(g), root)) == len(g)


def is_two_connected(g):
    """Strongly connected, and still so after deleting any single vertex.

    The empty graph and one-vertex graphs count as strongly connected.
    """
    if not is_strongly_connected(g):
        return False
    return all(is_strongly_connected_without(g, v) for v in g.vertices)


def is_strongly_connected_without(g, v):
    rest = [u for u in g.vertices if u != v]
    if len(rest) <= 1:
        return True
    root = rest[0]
    if len(reachable_from(g, root, avoid=(v,))) != len(rest):
        return False
    return len(reachable_from(reverse_graph(g), root, avoid=(v,))) == len(rest)


def shortest_path(g, source, target, avoid=()):
    """BFS path from ``source`` to ``target`` avoiding ``avoid``; None if absent.

    Ties are broken by sorted neighbour order, so the result is canonical.
    """
    avoid = set(avoid)
    if source in avoid or target in avoid:
        return None
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == target:
            break
        for w in g.successors(u):
            if w not in parent and w not in avoid:
                parent[w] = u
                queue.append(w)
    if target not in parent:
        return None
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def is_path(g, path):
    return len(path) >= 1 and all(v in g for v in path) and all(
        g.has_edge(a, b) for a, b in zip(path, path[1:])
    )


def is_simple_path(g, path):
    return is_path(g, path) and len(set(path)) == len(path)


def is_simple_cycle(g, cycle):
    return (
        len(cycle) >= 2
        and is_path(g, cycle)
        and cycle[0] == cycle[-1]
        and len(set(cycle[:-1])) == len(cycle) - 1
    )


def path_edges(path):
    return list(zip(path, path[1:]))


def simple_cycles(g):
    """All simple cycles, each listed once as (s, ..., s) with s its smallest vertex.

    Exhaustive DFS: only intended for the small graphs this package targets.
    """
    order = {v: i for i, v in enumerate(g.vertices)}
    out = []
    for s in g.vertices:
        stack = [(s, iter(g.successors(s)))]
        on_path = [s]
        while stack:
            u, it = stack[-1]
            w = next(it, None)
            if w is None:
                stack.pop()
                on_path.pop()
                continue
            if w == s:
                out.append(tuple(on_path) + (s,))
            elif order[w] > order[s] and w not in on_path:
                on_path.append(w)
                stack.append((w, iter(g.successors(w))))
    return out


def paths_meet_only_at_target(g, p1, p2, x1, x2, y):
    """Independent predicate for the output of :func:`disjoint_paths_to_target`."""
    return (
        is_simple_path(g, p1)
        and is_simple_path(g, p2)
        and p1[0] == x1
        and p2[0] == x2
        and p1[-1] == y
        and p2[-1] == y
        and set(p1) & set(p2) == {y}
    )


def disjoint_paths_to_target(g, x1, x2, y):
    """Two simple paths x1 -> y and x2 -> y whose only common vertex is y.

    Starts from a junction triple (x1 -> z, x2 -> z, z -> y) whose members
    meet only at z, then repeatedly reroutes around z along a path that
    avoids it, which strictly shortens the shared tail z -> y.
    """
    if len({x1, x2, y}) != 3:
        raise PreconditionViolated("x1, x2 and y must be pairwise distinct")
    for v in (x1, x2, y):
        if v not in g:
            raise UnknownVertex(v)
    if not is_two_connected(g):
        raise PreconditionViolated("graph is not 2-connected")

    g1 = shortest_path(g, x1, y)
    g2 = shortest_path(g, x2, y)
    on_g1 = {v: i for i, v in enumerate(g1)}
    t2 = next(i for i, v in enumerate(g2) if v in on_g1)
    t1 = on_g1[g2[t2]]
    p1, p2, tail = list(g1[: t1 + 1]), list(g2[: t2 + 1]), list(g1[t1:])

    while len(tail) > 1:
        z = tail[0]
        start = x1 if p1[0] != z else x2
        p = shortest_path(g, start, y, avoid=(z,))
        if p is None:  # unreachable for a 2-connected graph
            raise PreconditionViolated(f"no path from {start!r} to {y!r} avoiding {z!r}")
        branch_vertices = set(p1) | set(p2)
        s1 = max(i for i, v in enumerate(p) if v in branch_vertices)
        tail_pos = {v: i for i, v in enumerate(tail)}
        s2 = next(i for i in range(s1 + 1, len(p)) if p[i] in tail_pos)
        junction = tail_pos[p[s2]]
        detour = list(p[s1 + 1: s2 + 1])
        if p[s1] in p1:
            rerouted, other = p1, p2
        else:
            rerouted, other = p2, p1
        cut = rerouted.index(p[s1])
        new_rerouted = rerouted[: cut + 1] + detour
        new_other = other + tail[1: junction + 1]
        if rerouted is p1:
            p1, p2 = new_rerouted, new_other
        else:
            p2, p1 = new_rerouted, new_other
        tail = tail[junction:]
    return tuple(p1), tuple(p2)


def theorem_graph_problems(g):
    """Reasons ``g`` fails the hypotheses of the characterization workflow."""
    problems = []
    if g.has_self_loops():
        problems.append("graph has self-loops")
    if not is_two_connected(g):
        problems.append("graph is not 2-connected")
    if not is_two_connected(reverse_graph(g)):
        problems.append("reversed graph is not 2-connected")
    return problems


def graph_to_dict(g):
    return {"vertices": list(g.vertices), "edges": [list(e) for e in g.edges]}


def graph_from_dict(data, allow_self_loops=True):
    if not isinstance(data, dict) or set(data) != {"vertices", "edges"}:
        raise ValueError("graph JSON must be an object with exactly 'vertices' and 'edges'")
    vertices = data["vertices"]
    if not isinstance(vertices, list):
        raise ValueError("'vertices' must be a list")
    edges = []
    for item in data["edges"]:
        if not isinstance(item, list) or len(item) != 2:
            raise ValueError(f"edge entries must be [from, to] pairs, got {item!r}")
        edges.append(tuple(item))
    for v in chain(vertices, *edges):
        if isinstance(v, str) and "->" in v:
            raise ValueError(f"vertex id {v!r} may not contain '->'")
    return build_graph(vertices, edges, allow_self_loops=allow_self_loops)
