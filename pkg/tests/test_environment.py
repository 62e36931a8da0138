from fractions import Fraction as F
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revdirichlet.environment import (
    environment_from_json,
    environment_to_json,
    make_environment,
    make_weights,
    reverse_batch,
    reverse_environment,
    reversed_weights,
    sample_dirichlet_batch,
    sample_dirichlet_environment,
    stationary_batch,
    stationary_distribution,
    weight_divergence_is_null,
    weights_from_json,
    weights_to_json,
)
from revdirichlet.errors import InvalidEnvironment, NonPositiveAlpha, NotStronglyConnected, UnknownEdge
from revdirichlet.graph import build_graph, complete_graph, cycle_graph, reverse_graph
from revdirichlet.sampling import CHUNK_SIZE, chunk_generator, dirichlet_rows, log_standard_gamma

# asymmetric rational environment on K3 and its hand-solved stationary law and reversal
ASYM = {("a", "b"): F(1, 3), ("a", "c"): F(2, 3), ("b", "a"): F(1, 2), ("b", "c"): F(1, 2),
        ("c", "a"): F(3, 4), ("c", "b"): F(1, 4)}
ASYM_PI = {"a": F(21, 53), "b": F(12, 53), "c": F(20, 53)}
ASYM_REV = {("a", "b"): F(2, 7), ("a", "c"): F(5, 7), ("b", "a"): F(7, 12), ("b", "c"): F(5, 12),
            ("c", "a"): F(7, 10), ("c", "b"): F(3, 10)}


def test_environment_validation(k3):
    with pytest.raises(InvalidEnvironment):
        make_environment(k3, {**ASYM, ("a", "b"): F(1, 2)})
    with pytest.raises(InvalidEnvironment):
        make_environment(k3, {**ASYM, ("a", "b"): F(0), ("a", "c"): F(1)})
    with pytest.raises(UnknownEdge):
        make_environment(cycle_graph("abc"), {("a", "c"): 1})
    env = make_environment(k3, {**ASYM, ("a", "b"): F(0), ("a", "c"): F(1)}, degenerate=True)
    with pytest.raises(InvalidEnvironment):
        stationary_distribution(k3, env)


def test_stationary_examples(k3, c3):
    half = make_environment(k3, {e: F(1, 2) for e in k3.edges})
    assert stationary_distribution(k3, half) == {v: F(1, 3) for v in "abc"}
    ones = make_environment(c3, {e: 1 for e in c3.edges})
    assert stationary_distribution(c3, ones) == {v: F(1, 3) for v in "abc"}
    d2 = build_graph("ab", [("a", "b"), ("b", "a")])
    assert stationary_distribution(d2, make_environment(d2, {e: 1 for e in d2.edges})) == {
        "a": F(1, 2), "b": F(1, 2)}
    with pytest.raises(NotStronglyConnected):
        g = build_graph("ab", [("a", "b"), ("b", "b")])
        stationary_distribution(g, make_environment(g, {("a", "b"): 1, ("b", "b"): 1}))


def test_hand_solved_reversal(k3):
    env = make_environment(k3, ASYM)
    assert stationary_distribution(k3, env) == ASYM_PI
    rev = reverse_environment(k3, env)
    assert rev.graph == reverse_graph(k3)
    assert rev.omega == ASYM_REV
    assert reverse_environment(k3, rev).omega == ASYM


def test_float_mode_matches_exact(k3):
    env = make_environment(k3, {e: float(v) for e, v in ASYM.items()})
    assert env.mode == "float"
    pi = stationary_distribution(k3, env)
    for v in "abc":
        assert pi[v] == pytest.approx(float(ASYM_PI[v]), abs=1e-14)
    rev = reverse_environment(k3, env)
    for e, v in ASYM_REV.items():
        assert rev.omega[e] == pytest.approx(float(v), abs=1e-14)


def test_trivial_reversals(k3, c3):
    half = make_environment(k3, {e: F(1, 2) for e in k3.edges})
    assert reverse_environment(k3, half).omega == half.omega
    ones = make_environment(c3, {e: 1 for e in c3.edges})
    rev = reverse_environment(c3, ones)
    assert set(rev.omega) == {("b", "a"), ("c", "b"), ("a", "c")}
    assert set(rev.omega.values()) == {1}


def test_weight_divergence(k3, c3):
    assert weight_divergence_is_null(k3, make_weights(k3, 1))
    bumped = make_weights(k3, {e: 2 if e == ("a", "b") else 1 for e in k3.edges})
    assert not weight_divergence_is_null(k3, bumped)
    assert weight_divergence_is_null(c3, make_weights(c3, "7/3"))
    rev = reversed_weights(k3, bumped)
    assert rev[("b", "a")] == 2 and sum(rev.alpha.values()) == 7
    assert reversed_weights(reverse_graph(k3), rev).alpha == bumped.alpha
    with pytest.raises(NonPositiveAlpha):
        make_weights(k3, 0)


def test_sampler_determinism_and_rows(k3):
    alpha = make_weights(k3, 1)
    a = sample_dirichlet_batch(k3, alpha, 20000, seed=5)
    b = sample_dirichlet_batch(k3, alpha, 20000, seed=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_dirichlet_batch(k3, alpha, 20000, seed=6))
    # whole chunks do not depend on how many samples are requested
    assert np.array_equal(a[:CHUNK_SIZE], sample_dirichlet_batch(k3, alpha, CHUNK_SIZE, seed=5))
    for x in k3.vertices:
        idx = [k3.edge_index(e) for e in k3.out_edges(x)]
        assert np.allclose(a[:, idx].sum(axis=1), 1.0, atol=1e-12)
    e1 = sample_dirichlet_environment(k3, alpha, 9)
    e2 = sample_dirichlet_environment(k3, alpha, 9)
    assert e1.omega == e2.omega


def test_forced_rows_are_one(c3):
    w = sample_dirichlet_batch(c3, make_weights(c3, "1/2"), 50, seed=3)
    assert np.all(w == 1.0)


def test_dirichlet_moments_k3(k3):
    n = 100_000
    w = sample_dirichlet_batch(k3, make_weights(k3, 1), n, seed=11)
    col = w[:, k3.edge_index(("a", "b"))]
    se1 = col.std(ddof=1) / np.sqrt(n)
    se2 = (col ** 2).std(ddof=1) / np.sqrt(n)
    assert abs(col.mean() - 0.5) < 4 * se1
    assert abs((col ** 2).mean() - 1 / 3) < 4 * se2


@pytest.mark.parametrize("shape", [0.05, 0.3, 1.0, 2.5, 40.0])
def test_gamma_sampler_mean_and_variance(shape):
    n = 200_000
    g = np.exp(log_standard_gamma(chunk_generator(1, 0), shape, n))
    assert np.all(np.isfinite(g))
    # Gamma(k, 1) has mean k and variance k
    assert abs(g.mean() - shape) < 5 * np.sqrt(shape / n)
    fourth = np.var((g - shape) ** 2)
    assert abs(g.var() - shape) < 5 * np.sqrt(fourth / n)


def test_small_alpha_rows_stay_finite():
    w = dirichlet_rows(chunk_generator(0, 0), [1e-3, 1e-3, 1e-3], 5000)
    assert np.all(np.isfinite(w))
    assert np.allclose(w.sum(axis=1), 1.0)


def test_stationary_batch_matches_scalar(k3):
    w = sample_dirichlet_batch(k3, make_weights(k3, "1/2"), 50, seed=2)
    pis = stationary_batch(k3, w)
    rev = reverse_batch(k3, w)
    rg = reverse_graph(k3)
    for row, pi_row, rrow in zip(w, pis, rev):
        env = make_environment(k3, dict(zip(k3.edges, row.tolist())))
        pi = stationary_distribution(k3, env)
        assert np.allclose([pi[v] for v in k3.vertices], pi_row, atol=1e-13)
        r = reverse_environment(k3, env)
        assert np.allclose([r.omega[e] for e in rg.edges], rrow, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["abc", "abcd"]))
def test_reversal_involution_float(seed, labels):
    g = complete_graph(labels)
    env = sample_dirichlet_environment(g, make_weights(g, "1/2"), seed)
    pi = stationary_distribution(g, env)
    assert sum(pi.values()) == pytest.approx(1.0, abs=1e-12)
    for x in g.vertices:
        assert abs(sum(env.omega[(y, x)] * pi[y] for y in g.predecessors(x)) - pi[x]) < 1e-12
    rev = reverse_environment(g, env)
    for x in rev.graph.vertices:
        assert abs(sum(rev.row(x)) - 1.0) <= 1e-12
    back = reverse_environment(rev.graph, rev)
    for e, v in env.omega.items():
        assert abs(back.omega[e] - v) < 1e-10


def test_json_round_trips(k3):
    env = make_environment(k3, ASYM)
    data = environment_to_json(env)
    assert data["mode"] == "exact" and data["a->b"] == "1/3"
    assert environment_from_json(k3, json.loads(json.dumps(data))).omega == ASYM
    alpha = make_weights(k3, {e: "3/2" if e == ("a", "b") else 1 for e in k3.edges})
    assert weights_from_json(k3, weights_to_json(alpha)).alpha == alpha.alpha
    assert weights_from_json(k3, {**{f"{x}->{y}": 1.0 for x, y in k3.edges}}).exact is False
    with pytest.raises(UnknownEdge):
        weights_from_json(k3, {"a->z": 1})
