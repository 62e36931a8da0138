from fractions import Fraction as F
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FAMILIES, family_weights
from revdirichlet.environment import (
    make_environment,
    make_weights,
    reverse_batch,
    reverse_environment,
    reversed_weights,
    sample_dirichlet_batch,
    weights_from_json,
)
from revdirichlet.errors import NonPositiveAlpha
from revdirichlet.flows import enumerate_null_flows, flow_to_json
from revdirichlet.graph import complete_graph, graph_from_dict, reverse_graph
from revdirichlet.moments import (
    DeterministicOracle,
    DirichletOracle,
    EmpiricalOracle,
    TableOracle,
    check_compatibility,
    dirichlet_moment,
    exponent_vectors,
    rising_factorial,
    validate_moment_oracle,
)

FIXTURES = Path(__file__).parent / "fixtures"


def slow_moment(alpha, n):
    """Moment of Dirichlet(alpha) from the Gamma-function formula, term by term."""
    num = F(1)
    for a, k in zip(alpha, n):
        for i in range(k):
            num *= a + i
    den = F(1)
    s = sum(alpha)
    for i in range(sum(n)):
        den *= s + i
    return num / den


def test_rising_factorial():
    assert rising_factorial(3, 2) == 12
    assert all(rising_factorial(1, n) == math.factorial(n) for n in range(10))
    assert all(rising_factorial(a, 0) == 1 for a in (F(1, 3), 2, -5, 0.7))
    assert rising_factorial(-2, 3) == 0
    assert rising_factorial(F(1, 2), 2) == F(3, 4)


def test_dirichlet_moment_examples():
    assert dirichlet_moment([1, 1], (1, 0)) == F(1, 2)
    assert dirichlet_moment([1, 1], (2, 0)) == F(1, 3)
    assert dirichlet_moment([2, 1], (1, 0)) == F(2, 3)
    assert isinstance(dirichlet_moment([F(2), F(1)], (1, 0)), F)
    with pytest.raises(NonPositiveAlpha):
        dirichlet_moment([1, 0], (1, 0))


def test_dirichlet_moment_by_numeric_integration():
    # Beta(a, b) density on a fine midpoint grid
    x = (np.arange(200_000) + 0.5) / 200_000
    for (a, b), n, want in [((1, 1), 2, F(1, 3)), ((2, 1), 1, F(2, 3)), ((F(3, 2), 2), 3, None)]:
        a_, b_ = float(a), float(b)
        dens = x ** (a_ - 1) * (1 - x) ** (b_ - 1) * math.gamma(a_ + b_) / (math.gamma(a_) * math.gamma(b_))
        value = np.mean(dens * x ** n)
        exact = dirichlet_moment([a, b], (n, 0))
        assert value == pytest.approx(float(exact), rel=1e-6)
        if want is not None:
            assert exact == want


def test_dirichlet_moment_on_two_simplex():
    # Dir(1, 2, 3): integrate x1 * x2^2 over the simplex on a grid
    m = 1500
    u = (np.arange(m) + 0.5) / m
    x1, x2 = np.meshgrid(u, u, indexing="ij")
    inside = x1 + x2 < 1
    x3 = np.where(inside, 1 - x1 - x2, 0)
    dens = math.gamma(6) / (math.gamma(1) * math.gamma(2) * math.gamma(3)) * x2 * x3 ** 2
    value = np.sum(np.where(inside, dens * x1 * x2 ** 2, 0)) / m ** 2
    assert value == pytest.approx(float(dirichlet_moment([1, 2, 3], (1, 2, 0))), rel=1e-2)


alphas = st.lists(st.fractions(min_value=F(1, 10), max_value=10, max_denominator=12), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(alphas, st.data())
def test_simplex_identity(alpha, data):
    d = len(alpha)
    deg = data.draw(st.integers(0, 4))
    n = data.draw(st.sampled_from(exponent_vectors(d, deg)))
    assert dirichlet_moment(alpha, (0,) * d) == 1
    assert dirichlet_moment(alpha, n) == slow_moment(alpha, n)
    spread = sum(dirichlet_moment(alpha, tuple(v + (i == j) for i, v in enumerate(n))) for j in range(d))
    assert spread == dirichlet_moment(alpha, n)


def test_exponent_vectors():
    assert exponent_vectors(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert len(exponent_vectors(3, 4)) == math.comb(6, 2)
    assert exponent_vectors(1, 0) == [(0,)]


def test_validate_oracles(k3):
    alpha = make_weights(k3, {e: F(i + 1, 2) for i, e in enumerate(k3.edges)})
    assert validate_moment_oracle(k3, DirichletOracle(k3, alpha), 4)
    env = make_environment(k3, {e: F(1, 2) for e in k3.edges})
    assert validate_moment_oracle(k3, DeterministicOracle.from_environment(env), 4)
    table = TableOracle.from_oracle(DirichletOracle(k3, alpha), 4)
    assert validate_moment_oracle(k3, table, 4)
    bad = table.tampered("b", (0, 0), 2)
    check = validate_moment_oracle(k3, bad, 4)
    assert not check
    assert (check.witness["vertex"], check.witness["exponents"]) == ("b", (0, 0))
    bad = table.tampered("a", (1, 1), F(1, 7))
    check = validate_moment_oracle(k3, bad, 4)
    assert not check and check.witness["reason"] == "simplex identity fails"
    assert check.witness["vertex"] == "a"


def test_compatibility_null_divergence_k3(k3):
    ones = make_weights(k3, 1)
    report = check_compatibility(k3, DirichletOracle(k3, ones),
                                 DirichletOracle(k3, reversed_weights(k3, ones)), 6)
    assert report.passed and report.mode == "exact"
    assert len(report.records) == len(enumerate_null_flows(k3, 6))
    zero = check_compatibility(k3, DirichletOracle(k3, ones),
                               DirichletOracle(k3, reversed_weights(k3, ones)), 0)
    assert zero.passed and [(r.left, r.right) for r in zero.records] == [(1, 1)]


def test_compatibility_witness_fixture():
    fx = json.loads((FIXTURES / "compat_witness_k3.json").read_text())
    g = graph_from_dict(fx["graph"])
    alpha = weights_from_json(g, fx["alpha"])
    rg = reverse_graph(g)
    report = check_compatibility(g, DirichletOracle(g, alpha),
                                 DirichletOracle(rg, reversed_weights(g, alpha)), fx["max_total"])
    assert not report.passed
    w = report.witness
    assert flow_to_json(g, w.flow) == fx["first_failing_flow"]
    assert (w.left, w.right) == (F(fx["left"]), F(fx["right"]))
    assert sum(not r.passed for r in report.records) == fx["n_failing"]
    assert report.to_json()["witness"] == fx["first_failing_flow"]

    # independent exhaustive search with the term-by-term moment formula
    ralpha = {(y, x): a for (x, y), a in alpha.alpha.items()}
    failing = []
    for flow in enumerate_null_flows(g, fx["max_total"]):
        n = dict(zip(g.edges, flow))
        left = F(1)
        for x in g.vertices:
            out = g.out_edges(x)
            left *= slow_moment([alpha[e] for e in out], [n[e] for e in out])
        right = F(1)
        for x in rg.vertices:
            out = rg.out_edges(x)
            right *= slow_moment([ralpha[e] for e in out], [n[(b, a)] for a, b in out])
        if left != right:
            failing.append(flow)
    assert len(failing) == fx["n_failing"]
    assert flow_to_json(g, failing[0]) == fx["first_failing_flow"]


@pytest.mark.parametrize("label,graph,cycles", [f for f in FAMILIES if f[1] != "C5"])
def test_compatibility_symmetry(label, graph, cycles):
    g, alpha = family_weights(graph, cycles)
    rg = reverse_graph(g)
    ralpha = reversed_weights(g, alpha)
    fwd = check_compatibility(g, DirichletOracle(g, alpha), DirichletOracle(rg, ralpha), 4)
    back = check_compatibility(rg, DirichletOracle(rg, ralpha), DirichletOracle(g, alpha), 4)
    assert fwd.passed and back.passed
    assert sorted((r.left, r.right) for r in fwd.records) == sorted((r.right, r.left) for r in back.records)


def test_compatibility_symmetry_when_failing(k3):
    alpha = make_weights(k3, {e: 3 if e == ("a", "c") else 1 for e in k3.edges})
    ralpha = reversed_weights(k3, alpha)
    fwd = check_compatibility(k3, DirichletOracle(k3, alpha), DirichletOracle(k3, ralpha), 4)
    back = check_compatibility(k3, DirichletOracle(k3, ralpha), DirichletOracle(k3, alpha), 4)
    assert not fwd.passed and not back.passed
    assert sorted((r.left, r.right) for r in fwd.records) == sorted((r.right, r.left) for r in back.records)


def test_monotone_truncation(k4):
    alpha = make_weights(k4, 1)
    f, fr = DirichletOracle(k4, alpha), DirichletOracle(k4, reversed_weights(k4, alpha))
    big = check_compatibility(k4, f, fr, 5)
    assert big.passed
    for t in range(5):
        small = check_compatibility(k4, f, fr, t)
        assert small.passed
        assert [r.flow for r in small.records] == [r.flow for r in big.records[: len(small.records)]]


def test_deterministic_reversal_is_compatible(k3):
    env = make_environment(k3, {("a", "b"): F(1, 3), ("a", "c"): F(2, 3), ("b", "a"): F(1, 2),
                                ("b", "c"): F(1, 2), ("c", "a"): F(3, 4), ("c", "b"): F(1, 4)})
    rev = reverse_environment(k3, env)
    report = check_compatibility(k3, DeterministicOracle.from_environment(env),
                                 DeterministicOracle.from_environment(rev), 6)
    assert report.passed


def test_float_and_empirical_modes(k3):
    ones = make_weights(k3, 1.0)
    f, fr = DirichletOracle(k3, ones), DirichletOracle(k3, reversed_weights(k3, ones))
    report = check_compatibility(k3, f, fr, 4)
    assert report.mode == "float" and report.passed
    w = sample_dirichlet_batch(k3, ones, 50_000, seed=4)
    ef = EmpiricalOracle(k3, w)
    er = EmpiricalOracle(k3, reverse_batch(k3, w))
    report = check_compatibility(k3, ef, er, 3)
    assert report.mode == "empirical"
    assert report.passed
    assert all(r.z is not None for r in report.records)
    assert ef.standard_error("a", (1, 0)) == pytest.approx(np.sqrt(1 / 12 / 50_000), rel=0.05)


def test_report_json(k3):
    ones = make_weights(k3, 1)
    report = check_compatibility(k3, DirichletOracle(k3, ones), DirichletOracle(k3, ones), 2)
    data = report.to_json()
    assert data["verdict"] == "compatible"
    assert data["truncation"]["max_total"] == 2
    assert data["records"][1]["left"] == "1/4"
    json.dumps(data)
