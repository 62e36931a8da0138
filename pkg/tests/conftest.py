import itertools
from fractions import Fraction

import numpy as np
import pytest

from revdirichlet.environment import make_weights
from revdirichlet.graph import bidirected_cycle_graph, build_graph, complete_graph, cycle_graph


@pytest.fixture
def k3():
    return complete_graph("abc")


@pytest.fixture
def k4():
    return complete_graph("abcd")


@pytest.fixture
def c3():
    return cycle_graph("abc")


@pytest.fixture
def c5():
    return bidirected_cycle_graph("abcde")


def all_digraphs(n):
    """Every loop-free digraph on vertices 0..n-1."""
    verts = list(range(n))
    pairs = [(x, y) for x in verts for y in verts if x != y]
    for mask in range(1 << len(pairs)):
        yield build_graph(verts, [p for i, p in enumerate(pairs) if mask >> i & 1])


def reach_matrix(n, edges, removed=None):
    """Transitive closure by repeated boolean squaring; oracle independent of the library."""
    a = np.eye(n, dtype=bool)
    for x, y in edges:
        if removed not in (x, y):
            a[x, y] = True
    for _ in range(max(1, n).bit_length() + 1):
        a = (a.astype(int) @ a.astype(int)) > 0
    return a


def brute_strongly_connected(n, edges, removed=None):
    keep = [v for v in range(n) if v != removed]
    r = reach_matrix(n, edges, removed)
    return bool(r[np.ix_(keep, keep)].all())


def brute_two_connected(n, edges):
    return brute_strongly_connected(n, edges) and all(
        brute_strongly_connected(n, edges, removed=v) for v in range(n))


def cycle_superposition(g, coefficients):
    """1 on every edge plus a rational multiple of each given cycle's indicator."""
    alpha = {e: Fraction(1) for e in g.edges}
    for cycle, coeff in coefficients:
        for e in zip(cycle, cycle[1:]):
            alpha[e] += Fraction(coeff)
    return make_weights(g, alpha)


# Rational null-divergence weight families used by the round-trip tests.
FAMILIES = [
    ("K3 ones", "abc", []),
    ("K3 cyclic", "abc", [(("a", "b", "c", "a"), "3/2")]),
    ("K3 mixed", "abc", [(("a", "c", "b", "a"), "1/3"), (("a", "b", "a"), 2)]),
    ("K4 ones", "abcd", []),
    ("K4 two cycles", "abcd", [(("a", "b", "c", "d", "a"), "1/2"), (("b", "d", "b"), "5/4")]),
    ("C5 ones", "C5", []),
    ("C5 rotation", "C5", [(("a", "b", "c", "d", "e", "a"), "2/3")]),
]


def family_graph(label):
    if label == "C5":
        return bidirected_cycle_graph("abcde")
    return complete_graph(label)


def family_weights(label, cycles):
    g = family_graph(label)
    return g, cycle_superposition(g, cycles)


def pairs_of(iterable):
    return list(itertools.combinations(iterable, 2))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    doc = getattr(item.function, "__doc__", None) or ""
    if report.when == "call" and doc.startswith("Criterion"):
        report.user_properties.append(("criterion", doc.splitlines()[0]))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in rep.user_properties:
                if name == "criterion":
                    lines.append((value, "PASS" if key == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for value, verdict in sorted(lines, key=lambda t: int(t[0].split()[1].rstrip(":"))):
            terminalreporter.write_line(f"{verdict}  {value}")
