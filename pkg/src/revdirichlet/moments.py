"""Moment functions of environments and the forward/reversed compatibility test.

A moment oracle evaluates, at a vertex x, the expectation of
``prod_e omega(e) ** n_e`` over the out-edges e of x. Exponents are passed
as a tuple aligned with ``graph.out_edges(x)``. For an oracle of the
reversed graph the out-edges of x are the reversed in-edges of x in the
original graph.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
import math

import numpy as np

from .environment import WeightFamily, make_weights
from .errors import NonPositiveAlpha, PreconditionViolated
from .flows import enumerate_null_flows, flow_to_json
from .graph import reverse_graph
from .rational import format_number, is_exact

DEFAULT_MAX_TOTAL = 6
DEFAULT_FLOAT_TOL = 1e-9
DEFAULT_K_SE = 4.0


def rising_factorial(a, n):
    """H(a, n) = a (a + 1) ... (a + n - 1), with H(a, 0) = 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = Fraction(1) if is_exact(a) else 1.0
    for i in range(n):
        out *= a + i
    return out


def dirichlet_moment(alpha_row, n):
    """E[prod x_i ** n_i] for x ~ Dirichlet(alpha_row).

    Computed as prod H(alpha_i, n_i) / H(sum alpha, sum n); exact when every
    alpha_i is rational.
    """
    alpha_row = list(alpha_row)
    n = tuple(n)
    if len(alpha_row) != len(n):
        raise ValueError("alpha_row and n must have the same length")
    if any(not a > 0 for a in alpha_row):
        raise NonPositiveAlpha("Dirichlet parameters must be positive")
    num = Fraction(1) if all(is_exact(a) for a in alpha_row) else 1.0
    for a, k in zip(alpha_row, n):
        num *= rising_factorial(a, k)
    return num / rising_factorial(sum(alpha_row), sum(n))


def exponent_vectors(dim, degree):
    """All nonnegative integer vectors of length ``dim`` summing to ``degree``."""
    out = []
    for combo in combinations_with_replacement(range(dim), degree):
        v = [0] * dim
        for i in combo:
            v[i] += 1
        out.append(tuple(v))
    return sorted(out, reverse=True)


def unit(dim, i, k=1):
    v = [0] * dim
    v[i] = k
    return tuple(v)


def values_equal(a, b, tol=None):
    if tol is None or (is_exact(a) and is_exact(b)):
        return a == b
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def relative_gap(a, b):
    if a == b:
        return 0.0
    return float(abs(a - b) / max(abs(a), abs(b)))


class MomentOracle:
    """Per-vertex moment function on ``graph``; subclasses supply ``_evaluate``."""

    kind = "abstract"
    exact = True

    def __init__(self, graph):
        self.graph = graph

    def dim(self, x):
        return len(self.graph.out_edges(x))

    def counts(self, x, exponents):
        """Normalise a mapping ``{edge: n}`` or a tuple into an aligned tuple."""
        edges = self.graph.out_edges(x)
        if isinstance(exponents, Mapping):
            unknown = set(exponents) - set(edges)
            if unknown:
                raise KeyError(f"edges {sorted(unknown)!r} do not leave {x!r}")
            return tuple(int(exponents.get(e, 0)) for e in edges)
        exponents = tuple(int(v) for v in exponents)
        if len(exponents) != len(edges):
            raise ValueError(f"vertex {x!r} has {len(edges)} out-edges, got {len(exponents)} exponents")
        return exponents

    def __call__(self, x, exponents):
        c = self.counts(x, exponents)
        if any(v < 0 for v in c):
            raise ValueError("exponents must be nonnegative")
        return self._evaluate(x, c)

    def _evaluate(self, x, c):
        raise NotImplementedError

    def standard_error(self, x, exponents):
        return 0


class DirichletOracle(MomentOracle):
    kind = "dirichlet"

    def __init__(self, graph, alpha):
        super().__init__(graph)
        if not isinstance(alpha, WeightFamily):
            alpha = make_weights(graph, alpha)
        if alpha.graph != graph:
            raise ValueError("weights live on a different graph")
        self.alpha = alpha
        self.exact = alpha.exact
        self._rows = {x: tuple(alpha.row(x)) for x in graph.vertices}
        self._cached = lru_cache(maxsize=None)(self._moment)

    def _moment(self, x, c):
        return dirichlet_moment(self._rows[x], c)

    def _evaluate(self, x, c):
        return self._cached(x, c)


class DeterministicOracle(MomentOracle):
    """Moments of a fixed environment: prod c_e ** n_e."""

    kind = "deterministic"

    def __init__(self, graph, c):
        super().__init__(graph)
        self.c = {tuple(e): v for e, v in c.items()}
        if set(self.c) != set(graph.edges):
            raise ValueError("deterministic oracle needs a value on every edge")
        self.exact = all(is_exact(v) for v in self.c.values())

    @classmethod
    def from_environment(cls, env):
        return cls(env.graph, env.omega)

    def _evaluate(self, x, c):
        out = Fraction(1) if self.exact else 1.0
        for e, k in zip(self.graph.out_edges(x), c):
            out *= self.c[e] ** k
        return out


class TableOracle(MomentOracle):
    """Explicit ``{(x, counts): value}`` table, optionally backed by another oracle."""

    kind = "table"

    def __init__(self, graph, table, fallback=None):
        super().__init__(graph)
        self.table = dict(table)
        self.fallback = fallback
        exact_vals = all(is_exact(v) for v in self.table.values())
        self.exact = exact_vals and (fallback is None or fallback.exact)

    @classmethod
    def from_oracle(cls, oracle, degree_max):
        table = {}
        for x in oracle.graph.vertices:
            for deg in range(degree_max + 1):
                for c in exponent_vectors(oracle.dim(x), deg):
                    table[(x, c)] = oracle(x, c)
        return cls(oracle.graph, table)

    def tampered(self, x, exponents, value):
        table = dict(self.table)
        table[(x, self.counts(x, exponents))] = value
        return TableOracle(self.graph, table, self.fallback)

    def _evaluate(self, x, c):
        try:
            return self.table[(x, c)]
        except KeyError:
            if self.fallback is None:
                raise KeyError(f"no table entry for vertex {x!r}, exponents {c!r}") from None
            return self.fallback(x, c)


class EmpiricalOracle(MomentOracle):
    """Sample means of monomials over an (n, |E|) array of environments."""

    kind = "empirical"
    exact = False

    def __init__(self, graph, samples):
        super().__init__(graph)
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != len(graph.edges) or len(samples) < 2:
            raise ValueError("samples must be an (n >= 2, |E|) array aligned with graph.edges")
        self.samples = samples
        self._cols = {x: [graph.edge_index(e) for e in graph.out_edges(x)] for x in graph.vertices}
        self._stats = {}

    def _monomial(self, x, c):
        key = (x, c)
        if key not in self._stats:
            vals = np.ones(len(self.samples))
            for j, k in zip(self._cols[x], c):
                if k:
                    vals = vals * self.samples[:, j] ** k
            n = len(vals)
            self._stats[key] = (float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)))
        return self._stats[key]

    def _evaluate(self, x, c):
        return self._monomial(x, c)[0]

    def standard_error(self, x, exponents):
        return self._monomial(x, self.counts(x, exponents))[1]


@dataclass
class Validation:
    ok: bool
    witness: dict = None

    def __bool__(self):
        return self.ok


def validate_moment_oracle(g, f, degree_max, tol=None):
    """Check f_x(0) = 1 and f(n) = sum_j f(n + e_j) for every degree < degree_max.

    The second identity is the moment form of the unit row sum. Exact
    oracles are compared exactly, others to relative ``tol``.
    """
    if degree_max < 1:
        raise ValueError("degree_max must be at least 1")
    if f.graph != g:
        raise ValueError("oracle lives on a different graph")
    if tol is None and not f.exact:
        tol = DEFAULT_FLOAT_TOL
    for x in g.vertices:
        d = f.dim(x)
        zero = (0,) * d
        if not values_equal(f(x, zero), 1, tol):
            return Validation(False, {"vertex": x, "exponents": zero, "reason": "f_x(0) != 1",
                                      "value": f(x, zero)})
        for deg in range(degree_max):
            for c in exponent_vectors(d, deg):
                value = f(x, c)
                if not value > 0:
                    return Validation(False, {"vertex": x, "exponents": c,
                                              "reason": "non-positive moment", "value": value})
                spread = sum(f(x, tuple(v + (i == j) for i, v in enumerate(c))) for j in range(d))
                if not values_equal(value, spread, tol):
                    return Validation(False, {"vertex": x, "exponents": c,
                                              "reason": "simplex identity fails",
                                              "value": value, "sum_of_successors": spread})
    return Validation(True)


@dataclass
class FlowRecord:
    flow: tuple
    left: object
    right: object
    passed: bool
    discrepancy: float
    z: float = None


@dataclass
class CompatibilityReport:
    graph: object
    max_total: int
    mode: str
    records: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    @property
    def max_discrepancy(self):
        return max((r.discrepancy for r in self.records), default=0.0)

    @property
    def witness(self):
        return next((r for r in self.records if not r.passed), None)

    def to_json(self):
        def render(v):
            return format_number(v) if is_exact(v) else float(v)

        return {
            "verdict": "compatible" if self.passed else "incompatible",
            "mode": self.mode,
            "truncation": {"max_total": self.max_total,
                           "note": "only null-divergence flows with total <= max_total were checked"},
            "n_flows": len(self.records),
            "max_relative_discrepancy": self.max_discrepancy,
            "witness": None if self.witness is None else flow_to_json(self.graph, self.witness.flow),
            "records": [
                {"flow": flow_to_json(self.graph, r.flow), "left": render(r.left),
                 "right": render(r.right), "passed": r.passed,
                 "relative_discrepancy": r.discrepancy,
                 **({} if r.z is None else {"z": r.z})}
                for r in self.records
            ],
        }


def _side_product(oracle, g_side, counts_of):
    prod = Fraction(1) if oracle.exact else 1.0
    rel_var = 0.0
    for x in g_side.vertices:
        c = counts_of(x)
        v = oracle(x, c)
        prod *= v
        se = oracle.standard_error(x, c)
        if se:
            rel_var += (se / v) ** 2
    return prod, rel_var


def check_compatibility(g, f, f_rev, max_total=DEFAULT_MAX_TOTAL, tolerance=None,
                        k_se=DEFAULT_K_SE, max_flows=None):
    """Compare prod_x f_x(N|E_x) with prod_x f_rev_x(N|E^x) for every flow N.

    Every null-divergence N with total <= ``max_total`` is checked. With two
    exact oracles the comparison is exact; with an empirical oracle it is
    within ``k_se`` delta-method standard errors; otherwise within relative
    ``tolerance``.
    """
    rg = reverse_graph(g)
    if f.graph != g or f_rev.graph != rg:
        raise PreconditionViolated("f must live on g and f_rev on reverse_graph(g)")
    empirical = isinstance(f, EmpiricalOracle) or isinstance(f_rev, EmpiricalOracle)
    exact = f.exact and f_rev.exact and tolerance is None and not empirical
    mode = "empirical" if empirical else ("exact" if exact else "float")
    if mode == "float" and tolerance is None:
        tolerance = DEFAULT_FLOAT_TOL
    kwargs = {} if max_flows is None else {"max_flows": max_flows}
    flows = enumerate_null_flows(g, max_total, **kwargs)

    fwd_idx = {x: [g.edge_index(e) for e in g.out_edges(x)] for x in g.vertices}
    # reversed edge (x, y) carries the flow of the original edge (y, x)
    rev_idx = {x: [g.edge_index((y, x)) for _, y in rg.out_edges(x)] for x in rg.vertices}

    report = CompatibilityReport(g, max_total, mode)
    for flow in flows:
        left, lv = _side_product(f, g, lambda x: tuple(flow[i] for i in fwd_idx[x]))
        right, rv = _side_product(f_rev, rg, lambda x: tuple(flow[i] for i in rev_idx[x]))
        gap = relative_gap(left, right)
        z = None
        if mode == "exact":
            passed = left == right
        elif mode == "empirical":
            se = math.sqrt(float(left) ** 2 * lv + float(right) ** 2 * rv)
            z = 0.0 if se == 0 else float(abs(left - right) / se)
            passed = (left == right) if se == 0 else z <= k_se
        else:
            passed = values_equal(left, right, tolerance)
        report.records.append(FlowRecord(flow, left, right, passed, gap, z))
    return report


def oracle_table_to_json(oracle, degree_max):
    """Every moment up to ``degree_max`` as ``{vertex: {"n1,n2,...": value}}``."""
    out = {}
    for x in oracle.graph.vertices:
        row = {}
        for deg in range(degree_max + 1):
            for c in exponent_vectors(oracle.dim(x), deg):
                v = oracle(x, c)
                row[",".join(map(str, c))] = format_number(v) if is_exact(v) else float(v)
        out[str(x)] = row
    return out
