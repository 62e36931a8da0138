"""Environments on directed graphs, Dirichlet weights and time reversal.

An environment assigns each edge (x, y) the probability of stepping from x
to y. Exact environments hold :class:`fractions.Fraction` values and every
derived quantity (stationary law, reversal) stays exact; float environments
are checked to 1e-12.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    InvalidEnvironment,
    NonPositiveAlpha,
    NotStronglyConnected,
    SingularSystem,
    UnknownEdge,
)
from .flows import parse_edge_key
from .graph import is_strongly_connected, reverse_graph
from .rational import format_number, is_exact, parse_number, solve_exact
from .sampling import CHUNK_SIZE, chunk_bounds, chunk_generator, dirichlet_rows

FLOAT_ROW_TOL = 1e-12
FLOAT_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class Environment:
    graph: object
    omega: dict
    mode: str = "exact"
    degenerate: bool = False

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if set(self.omega) != set(self.graph.edges):
            raise InvalidEnvironment("environment must assign every edge exactly once")
        for x in self.graph.vertices:
            row = [self.omega[e] for e in self.graph.out_edges(x)]
            if not row:
                raise InvalidEnvironment(f"vertex {x!r} has no outgoing edge")
            if any(v < 0 or v > 1 for v in row):
                raise InvalidEnvironment(f"row {x!r} has entries outside [0, 1]")
            if not self.degenerate and any(v == 0 for v in row):
                raise InvalidEnvironment(f"row {x!r} has a zero entry")
            s = sum(row)
            if self.mode == "exact":
                if s != 1:
                    raise InvalidEnvironment(f"row {x!r} sums to {s}, not 1")
            elif abs(s - 1.0) > FLOAT_ROW_TOL:
                raise InvalidEnvironment(f"row {x!r} sums to {s!r}")

    def __getitem__(self, edge):
        return self.omega[edge]

    def row(self, x):
        return [self.omega[e] for e in self.graph.out_edges(x)]

    def as_array(self):
        return np.array([float(self.omega[e]) for e in self.graph.edges])


def make_environment(g, omega, mode=None, degenerate=False):
    """Build an environment, inferring the mode from the value types."""
    values = {}
    for e, v in omega.items():
        e = tuple(e)
        if not g.has_edge(*e):
            raise UnknownEdge(f"{e!r} is not an edge of the graph")
        values[e] = parse_number(v) if not isinstance(v, (float, np.floating)) else float(v)
    if mode is None:
        mode = "exact" if all(is_exact(v) for v in values.values()) else "float"
    if mode == "float":
        values = {e: float(v) for e, v in values.items()}
    elif not all(is_exact(v) for v in values.values()):
        raise InvalidEnvironment("exact mode needs rational values")
    return Environment(g, values, mode, degenerate)


def environment_from_array(g, w):
    return Environment(g, {e: float(v) for e, v in zip(g.edges, w)}, "float")


@dataclass(frozen=True)
class WeightFamily:
    graph: object
    alpha: dict

    def __post_init__(self):
        if set(self.alpha) != set(self.graph.edges):
            raise NonPositiveAlpha("weights must be given on every edge")
        for e, a in self.alpha.items():
            if not a > 0:
                raise NonPositiveAlpha(f"alpha{e!r} = {a!r} is not positive")

    def __getitem__(self, edge):
        return self.alpha[edge]

    def row(self, x):
        return [self.alpha[e] for e in self.graph.out_edges(x)]

    def in_row(self, x):
        return [self.alpha[e] for e in self.graph.in_edges(x)]

    @property
    def exact(self):
        return all(is_exact(a) for a in self.alpha.values())


def make_weights(g, alpha):
    if not isinstance(alpha, dict):
        alpha = {e: alpha for e in g.edges}
    values = {}
    for e, a in alpha.items():
        e = tuple(e)
        if not g.has_edge(*e):
            raise UnknownEdge(f"{e!r} is not an edge of the graph")
        values[e] = float(a) if isinstance(a, (float, np.floating)) else parse_number(a)
    return WeightFamily(g, values)


def weight_divergence(g, alpha):
    """Per-vertex out-weight minus in-weight."""
    return {x: sum(alpha.row(x)) - sum(alpha.in_row(x)) for x in g.vertices}


def weight_divergence_is_null(g, alpha, tol=0.0):
    out = weight_divergence(g, alpha)
    if alpha.exact:
        return all(v == 0 for v in out.values())
    return all(abs(v) <= tol for v in out.values())


def reversed_weights(g, alpha):
    """Weights on the reversed graph: the reversed edge (x, y) carries alpha[(y, x)]."""
    rg = reverse_graph(g)
    return WeightFamily(rg, {(y, x): a for (x, y), a in alpha.alpha.items()})


def sample_dirichlet_batch(g, alpha, n_samples, seed, stream=0):
    """``n_samples`` environments as an (n, |E|) array aligned with ``g.edges``.

    Rows at different vertices are independent; out-degree-one rows are 1.
    """
    if not isinstance(alpha, WeightFamily):
        alpha = make_weights(g, alpha)
    out = np.empty((n_samples, len(g.edges)))
    cols = {x: [g.edge_index(e) for e in g.out_edges(x)] for x in g.vertices}
    for c, (lo, hi) in enumerate(chunk_bounds(n_samples, CHUNK_SIZE)):
        rng = chunk_generator(seed, c, stream)
        for x in g.vertices:
            idx = cols[x]
            if not idx:
                continue
            out[lo:hi, idx] = dirichlet_rows(rng, [float(a) for a in alpha.row(x)], hi - lo)
    return out


def sample_dirichlet_environment(g, alpha, seed):
    """One Dirichlet environment, deterministic given ``seed``."""
    return environment_from_array(g, sample_dirichlet_batch(g, alpha, 1, seed)[0])


def transition_matrix(g, omega):
    n = len(g.vertices)
    pos = {v: i for i, v in enumerate(g.vertices)}
    if omega.mode == "exact":
        p = [[Fraction(0)] * n for _ in range(n)]
    else:
        p = np.zeros((n, n))
    for (x, y), w in omega.omega.items():
        p[pos[x]][pos[y]] = w
    return p


def _check_reversible_input(g, omega):
    if not is_strongly_connected(g):
        raise NotStronglyConnected("stationary law needs a strongly connected graph")
    if any(v <= 0 for v in omega.omega.values()):
        raise InvalidEnvironment("reversal needs strictly positive transition probabilities")


def stationary_distribution(g, omega):
    """Unique invariant probability vector, keyed by vertex."""
    _check_reversible_input(g, omega)
    n = len(g.vertices)
    p = transition_matrix(g, omega)
    if omega.mode == "exact":
        a = [[p[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
        a[-1] = [Fraction(1)] * n
        b = [Fraction(0)] * (n - 1) + [Fraction(1)]
        pi = solve_exact(a, b)
        if pi is None:
            raise SingularSystem("stationary system is singular")
        return dict(zip(g.vertices, pi))
    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
        # one step of iterative refinement
        pi = pi + np.linalg.solve(a, b - a @ pi)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if np.any(pi <= 0) or np.max(np.abs(pi @ p - pi)) > FLOAT_RESIDUAL_TOL:
        raise SingularSystem("stationary solve did not reach the residual tolerance")
    return dict(zip(g.vertices, pi.tolist()))


def reverse_environment(g, omega):
    """Environment of the time-reversed chain, living on ``reverse_graph(g)``."""
    pi = stationary_distribution(g, omega)
    rg = reverse_graph(g)
    rev = {(y, x): w * pi[x] / pi[y] for (x, y), w in omega.omega.items()}
    if omega.mode == "float":
        # renormalise the rounding error away; rows are re-validated below
        for x in rg.vertices:
            s = sum(rev[e] for e in rg.out_edges(x))
            for e in rg.out_edges(x):
                rev[e] /= s
    return Environment(rg, rev, omega.mode)


def stationary_batch(g, w):
    """Stationary laws for an (n, |E|) batch of environments, shape (n, |V|)."""
    n, m = w.shape
    k = len(g.vertices)
    pos = {v: i for i, v in enumerate(g.vertices)}
    rows = np.array([pos[x] for x, _ in g.edges])
    cols = np.array([pos[y] for _, y in g.edges])
    a = np.zeros((n, k, k))
    # a = P^T - I with the last row replaced by the normalisation
    a[:, cols, rows] = w
    a[:, np.arange(k), np.arange(k)] -= 1.0
    a[:, -1, :] = 1.0
    b = np.zeros((n, k, 1))
    b[:, -1, 0] = 1.0
    pi = np.linalg.solve(a, b)
    pi = pi + np.linalg.solve(a, b - a @ pi)
    return pi[:, :, 0]


def reverse_batch(g, w):
    """Reverse an (n, |E|) batch; result is aligned with ``reverse_graph(g).edges``."""
    if np.any(w <= 0):
        raise InvalidEnvironment("reversal needs strictly positive transition probabilities")
    if not is_strongly_connected(g):
        raise NotStronglyConnected("stationary law needs a strongly connected graph")
    rg = reverse_graph(g)
    pi = stationary_batch(g, w)
    pos = {v: i for i, v in enumerate(g.vertices)}
    out = np.empty_like(w)
    for j, (x, y) in enumerate(rg.edges):
        # reversed edge (x, y) comes from the original edge (y, x)
        i = g.edge_index((y, x))
        out[:, j] = w[:, i] * pi[:, pos[y]] / pi[:, pos[x]]
    for x in rg.vertices:
        idx = [rg.edge_index(e) for e in rg.out_edges(x)]
        out[:, idx] /= out[:, idx].sum(axis=1, keepdims=True)
    return out


def environment_to_json(omega):
    out = {"mode": omega.mode}
    for x, y in omega.graph.edges:
        v = omega.omega[(x, y)]
        out[f"{x}->{y}"] = format_number(v) if omega.mode == "exact" else float(v)
    return out


def weights_to_json(alpha):
    return {f"{x}->{y}": format_number(alpha.alpha[(x, y)]) for x, y in alpha.graph.edges}


def _keyed_values(g, data):
    if not isinstance(data, dict):
        raise ValueError("expected a JSON object keyed by 'a->b' edges")
    return {parse_edge_key(g, k): parse_number(v) for k, v in data.items()}


def weights_from_json(g, data):
    values = _keyed_values(g, data)
    missing = [e for e in g.edges if e not in values]
    if missing:
        raise NonPositiveAlpha(f"weights missing for edges {missing!r}")
    return WeightFamily(g, values)


def environment_from_json(g, data):
    data = dict(data)
    mode = data.pop("mode", None)
    return make_environment(g, _keyed_values(g, data), mode=mode)
