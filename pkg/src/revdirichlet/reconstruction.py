"""Classify a pair of forward/reversed moment oracles.

The pipeline factors the single-edge moments into edge and vertex
functions, recovers the global degree gauge, then fits each vertex to
either a Dirichlet or a deterministic law. Every stage re-checks the
identities it relies on, so arbitrary (non-RWRE) tables are reported as
inconsistent with a witness instead of being silently misclassified.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    BranchMismatch,
    CycleProductViolation,
    FormMismatch,
    GaugeInconsistency,
    NegativeBeta,
    OracleInvalid,
    PathProductMismatch,
    PreconditionViolated,
    StageFailure,
)
from .graph import reverse_graph, shortest_path, simple_cycles, theorem_graph_problems
from .moments import (
    DEFAULT_FLOAT_TOL,
    DEFAULT_K_SE,
    EmpiricalOracle,
    dirichlet_moment,
    exponent_vectors,
    rising_factorial,
    unit,
    validate_moment_oracle,
    values_equal,
)
from .rational import format_number, is_exact

DEFAULT_N_MAX = 4


class GraphPreconditionViolated(PreconditionViolated):
    pass


def _one(exact):
    return Fraction(1) if exact else 1.0


def _render(v):
    if isinstance(v, (list, tuple)):
        return [_render(u) for u in v]
    if isinstance(v, dict):
        return {str(k): _render(u) for k, u in v.items()}
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if is_exact(v):
        return format_number(v)
    return v


def _edge_label(e):
    return f"{e[0]}->{e[1]}"


@dataclass
class EdgeRatioTable:
    """g[(x, y)][n] = f_x(n xy) / f_rev_y(n yx) for n = 0..n_max."""

    graph: object
    n_max: int
    g: dict
    cycles: list = field(default_factory=list)


def edge_ratios(g, f, f_rev, n_max, tol=None):
    """Tabulate the edge ratios and check that they multiply to 1 on every simple cycle."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    table = {}
    for x, y in g.edges:
        fx = [f(x, unit(f.dim(x), f.graph.out_edges(x).index((x, y)), n)) for n in range(n_max + 1)]
        fy = [f_rev(y, unit(f_rev.dim(y), f_rev.graph.out_edges(y).index((y, x)), n))
              for n in range(n_max + 1)]
        table[(x, y)] = [a / b for a, b in zip(fx, fy)]
    cycles = simple_cycles(g)
    exact = tol is None
    for cycle in cycles:
        for n in range(1, n_max + 1):
            prod = _one(exact)
            for e in zip(cycle, cycle[1:]):
                prod *= table[e][n]
            if not values_equal(prod, 1, tol):
                raise CycleProductViolation(
                    f"edge ratios multiply to {prod} != 1 around {cycle} at n={n}",
                    {"cycle": list(cycle), "n": n, "product": prod},
                )
    return EdgeRatioTable(g, n_max, table, cycles)


@dataclass
class EdgeVertexFactorization:
    h: dict
    h_tilde: dict
    base_vertex: object
    n_max: int

    def rescaled(self, delta):
        """Multiply every h_e(n) and h_tilde_x(n) by ``delta(n)``."""
        return EdgeVertexFactorization(
            {e: [v * delta(n) for n, v in enumerate(vals)] for e, vals in self.h.items()},
            {x: [v * delta(n) for n, v in enumerate(vals)] for x, vals in self.h_tilde.items()},
            self.base_vertex,
            self.n_max,
        )


def _bfs_tree_paths(g, base, descending=False):
    order = (lambda seq: tuple(reversed(seq))) if descending else (lambda seq: seq)
    parent = {base: None}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for w in order(g.successors(u)):
            if w not in parent:
                parent[w] = u
                queue.append(w)
    paths = {}
    for v in parent:
        p = [v]
        while parent[p[-1]] is not None:
            p.append(parent[p[-1]])
        paths[v] = tuple(reversed(p))
    return paths


def _path_product(ratios, path, n, exact):
    prod = _one(exact)
    for e in zip(path, path[1:]):
        prod *= ratios.g[e][n]
    return prod


def derive_factorization(g, ratios, f, f_rev, n_max, base=None, descending=False, tol=None):
    """Vertex potentials from edge ratios, plus matching edge functions.

    h_tilde is 1 at the base vertex (smallest id unless given) and the
    product of edge ratios along a BFS path elsewhere. Every value is
    re-derived along an alternative path and both factorization identities
    are checked for n <= n_max.
    """
    exact = tol is None
    base = g.vertices[0] if base is None else base
    paths = _bfs_tree_paths(g, base, descending)
    if len(paths) != len(g.vertices):
        raise PathProductMismatch("graph is not strongly connected from the base vertex",
                                  {"base": base})
    h_tilde = {y: [_path_product(ratios, paths[y], n, exact) for n in range(n_max + 1)]
               for y in g.vertices}

    for y in g.vertices:
        if y == base:
            continue
        first = paths[y][1]
        alt = None
        for w in g.successors(base):
            if w == first:
                continue
            rest = (w,) if w == y else shortest_path(g, w, y, avoid=(base,))
            if rest is not None:
                alt = (base,) + tuple(rest)
                break
        if alt is None:
            continue
        for n in range(1, n_max + 1):
            other = _path_product(ratios, alt, n, exact)
            if not values_equal(other, h_tilde[y][n], tol):
                raise PathProductMismatch(
                    f"path products to {y!r} disagree at n={n}",
                    {"vertex": y, "n": n, "paths": [list(paths[y]), list(alt)],
                     "products": [h_tilde[y][n], other]},
                )
    for (u, v), vals in ratios.g.items():
        for n in range(1, n_max + 1):
            if not values_equal(vals[n] * h_tilde[u][n], h_tilde[v][n], tol):
                raise PathProductMismatch(
                    f"edge ratio on {(u, v)!r} is not a potential difference at n={n}",
                    {"edge": [u, v], "n": n},
                )

    h = {}
    for x, y in g.edges:
        i = f.graph.out_edges(x).index((x, y))
        h[(x, y)] = [f(x, unit(f.dim(x), i, n)) * h_tilde[x][n] for n in range(n_max + 1)]
    for x, y in g.edges:
        j = f_rev.graph.out_edges(y).index((y, x))
        for n in range(n_max + 1):
            fwd = f(x, unit(f.dim(x), f.graph.out_edges(x).index((x, y)), n))
            rev = f_rev(y, unit(f_rev.dim(y), j, n))
            if not (values_equal(fwd, h[(x, y)][n] / h_tilde[x][n], tol)
                    and values_equal(rev, h[(x, y)][n] / h_tilde[y][n], tol)):
                raise PathProductMismatch(
                    f"factorization identity fails on {(x, y)!r} at n={n}",
                    {"edge": [x, y], "n": n},
                )
    return EdgeVertexFactorization(h, h_tilde, base, n_max)


@dataclass
class ResidualSite:
    """A per-vertex residual moment function, forward or reversed side."""

    side: str
    vertex: object
    edges: tuple
    func: object

    @property
    def dim(self):
        return len(self.edges)

    def __call__(self, counts):
        return self.func(tuple(counts))


def residual_sites(g, f, f_rev, fact):
    """r_x(m) = f_x(m) h_tilde_x(|m|) / prod_e h_e(m_e), on both sides."""
    rg = reverse_graph(g)
    sites = []

    def make(oracle, x, edges):
        def r(c):
            val = oracle(x, c) * fact.h_tilde[x][sum(c)]
            for e, k in zip(edges, c):
                val /= fact.h[e][k]
            return val
        return r

    for x in g.vertices:
        edges = g.out_edges(x)
        sites.append(ResidualSite("forward", x, edges, make(f, x, edges)))
    for x in rg.vertices:
        # reversed edge (x, y) is the original edge (y, x)
        edges = tuple((y, x) for _, y in rg.out_edges(x))
        sites.append(ResidualSite("reversed", x, edges, make(f_rev, x, edges)))
    return sites


@dataclass
class Gauge:
    delta: list

    def __call__(self, n):
        return self.delta[n]


def _site_label(site):
    return {"side": site.side, "vertex": site.vertex}


def recover_gauge(g, residuals, n_max, tol=None):
    """Recover Delta with residual r_x(m) = prod Delta(m_e) / Delta(|m|).

    Delta(n + 1) = Delta(n) / r(n e_1 + e_2) at a reference site with at
    least two coordinates, then every site and every exponent vector of
    degree <= n_max is checked against the recovered Delta.
    """
    exact = tol is None
    one = _one(exact)
    for site in residuals:
        for i in range(site.dim):
            for n in range(n_max + 1):
                v = site(unit(site.dim, i, n))
                if not values_equal(v, 1, tol):
                    raise GaugeInconsistency(
                        f"single-edge residual {v} != 1",
                        {**_site_label(site), "exponents": list(unit(site.dim, i, n)), "value": v},
                    )
    delta = [one, one]
    ref = next((s for s in residuals if s.dim >= 2), None)
    for n in range(1, n_max):
        if ref is None:
            delta.append(one)
            continue
        r = ref(tuple([n, 1] + [0] * (ref.dim - 2)))
        if r == 0:
            raise GaugeInconsistency("zero residual", {**_site_label(ref), "n": n})
        delta.append(delta[n] / r)
    gauge = Gauge(delta)

    for site in residuals:
        if site.dim < 2:
            continue
        for i in range(site.dim):
            for j in range(site.dim):
                if i == j:
                    continue
                for n in range(1, n_max):
                    c = [0] * site.dim
                    c[i], c[j] = n, 1
                    implied = delta[n] / site(c)
                    if not values_equal(implied, delta[n + 1], tol):
                        raise GaugeInconsistency(
                            f"Delta({n + 1}) implied as {implied} here but {delta[n + 1]} at the reference",
                            {"reference": {**_site_label(ref), "exponents": [n, 1] + [0] * (ref.dim - 2)},
                             "conflict": {**_site_label(site), "exponents": c},
                             "values": [delta[n + 1], implied]},
                        )
    for site in residuals:
        for deg in range(n_max + 1):
            for c in exponent_vectors(site.dim, deg):
                expected = one
                for k in c:
                    expected *= delta[k]
                expected /= delta[deg]
                v = site(c)
                if not values_equal(v, expected, tol):
                    raise GaugeInconsistency(
                        f"residual {v} != {expected}",
                        {**_site_label(site), "exponents": list(c), "value": v, "expected": expected},
                    )
    return gauge


@dataclass
class VertexLaw:
    branch: str
    params: list
    total: object
    gamma: object

    def to_json(self):
        key = "beta" if self.branch == "dirichlet" else "c"
        return {"branch": self.branch, key: _render(self.params),
                "beta_total": _render(self.total), "gamma": _render(self.gamma)}


def classify_vertex(moment, dim, h, h_tilde, n_max, tol=None):
    """Fit one vertex table to a Dirichlet or a deterministic law.

    ``moment`` maps an exponent tuple to the table value, ``h`` holds one
    list h_i(0..n_max) per coordinate and ``h_tilde`` one list for the
    vertex. After dividing by gamma ** n with gamma = h_tilde(1), the branch
    is Dirichlet iff h_tilde(2) != 1, with total weight
    beta = 1 / (h_tilde(2) - 1) and beta_i = f(e_i) beta.
    """
    exact = tol is None
    one = _one(exact)
    if n_max < 2:
        raise ValueError("classification needs tables up to degree 2 at least")
    if not values_equal(h_tilde[0], 1, tol) or any(not values_equal(hi[0], 1, tol) for hi in h):
        raise FormMismatch("h(0) and h_tilde(0) must be 1", {"degree": 0})
    if any(hi[1] == 0 for hi in h):
        raise FormMismatch("h_i(1) must be nonzero", {"degree": 1})
    gamma = h_tilde[1]
    if gamma == 0:
        raise FormMismatch("h_tilde(1) must be nonzero", {"degree": 1})
    ht = [v / gamma ** n for n, v in enumerate(h_tilde)]
    hn = [[v / gamma ** n for n, v in enumerate(hi)] for hi in h]
    firsts = [moment(unit(dim, i)) for i in range(dim)]

    if values_equal(ht[2], 1, tol):
        expected_h = lambda i, n: firsts[i] ** n  # noqa: E731
        expected_ht = lambda n: one  # noqa: E731

        def expected_f(c):
            out = one
            for ci, k in zip(firsts, c):
                out *= ci ** k
            return out

        law = VertexLaw("deterministic", firsts, None, gamma)
    else:
        beta = 1 / (ht[2] - 1)
        betas = [fi * beta for fi in firsts]
        if not beta > 0 or any(not b > 0 for b in betas):
            raise NegativeBeta(
                "fitted Dirichlet parameters are not all positive",
                {"beta_total": beta, "beta": betas},
            )
        expected_h = lambda i, n: rising_factorial(betas[i], n) / beta ** n  # noqa: E731
        expected_ht = lambda n: rising_factorial(beta, n) / beta ** n  # noqa: E731

        def expected_f(c):
            return dirichlet_moment(betas, c)

        law = VertexLaw("dirichlet", betas, beta, gamma)

    for n in range(n_max + 1):
        if not values_equal(ht[n], expected_ht(n), tol):
            raise FormMismatch(f"normalised h_tilde({n}) does not match the {law.branch} form",
                               {"degree": n, "value": ht[n], "expected": expected_ht(n)})
        for i in range(dim):
            if not values_equal(hn[i][n], expected_h(i, n), tol):
                raise FormMismatch(f"normalised h_{i}({n}) does not match the {law.branch} form",
                                   {"coordinate": i, "degree": n, "value": hn[i][n],
                                    "expected": expected_h(i, n)})
    for deg in range(n_max + 1):
        for c in exponent_vectors(dim, deg):
            v, want = moment(c), expected_f(c)
            if not values_equal(v, want, tol):
                raise FormMismatch(f"moment at {c} does not match the {law.branch} form",
                                   {"exponents": list(c), "value": v, "expected": want})
    return law


@dataclass
class ReconstructionResult:
    verdict: str
    n_max: int
    mode: str
    beta: dict = None
    null_divergence: bool = None
    c: dict = None
    witness: dict = None
    confidence: str = "exact"
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_dirichlet(self):
        return self.verdict == "dirichlet"

    def to_json(self):
        out = {"verdict": self.verdict, "mode": self.mode, "n_max": self.n_max,
               "confidence": self.confidence}
        if self.beta is not None:
            out["beta"] = {_edge_label(e): _render(v) for e, v in self.beta.items()}
            out["null_divergence"] = self.null_divergence
        if self.c is not None:
            out["c"] = {_edge_label(e): _render(v) for e, v in self.c.items()}
        if self.witness is not None:
            out["witness"] = _render(self.witness)
        out["diagnostics"] = self.diagnostics
        return out


def _max_relative_se(oracle, n_max):
    worst = 0.0
    for x in oracle.graph.vertices:
        for deg in range(n_max + 1):
            for c in exponent_vectors(oracle.dim(x), deg):
                v = oracle(x, c)
                if v:
                    worst = max(worst, oracle.standard_error(x, c) / abs(v))
    return worst


def _resolve_tolerance(f, f_rev, tol, k_se, n_max):
    if isinstance(f, EmpiricalOracle) or isinstance(f_rev, EmpiricalOracle):
        if tol is None:
            tol = k_se * max(_max_relative_se(f, n_max), _max_relative_se(f_rev, n_max))
        return "empirical", tol, f"approximate: equalities relaxed to relative tolerance {tol:.3g} ({k_se:g} standard errors)"
    if f.exact and f_rev.exact and tol is None:
        return "exact", None, "exact"
    tol = DEFAULT_FLOAT_TOL if tol is None else tol
    return "float", tol, f"approximate: relative tolerance {tol:.3g}"


def characterize(g, f, f_rev, n_max=DEFAULT_N_MAX, tol=None, k_se=DEFAULT_K_SE, gauge_twist=None):
    """Classify (f, f_rev) as Dirichlet with null divergence, deterministic or inconsistent.

    ``gauge_twist``, if given, multiplies the edge/vertex factorization by
    ``gauge_twist(n)`` before the gauge is recovered; the verdict must not
    depend on it.
    """
    problems = theorem_graph_problems(g)
    if problems:
        raise GraphPreconditionViolated("; ".join(problems))
    forced = all(len(g.out_edges(x)) == 1 for x in g.vertices)
    if len(g.vertices) < 3 and not forced:
        raise GraphPreconditionViolated("fewer than three vertices")
    rg = reverse_graph(g)
    if f.graph != g or f_rev.graph != rg:
        raise PreconditionViolated("f must live on g and f_rev on reverse_graph(g)")
    if n_max < 2:
        raise ValueError("n_max must be at least 2")

    mode, tol, confidence = _resolve_tolerance(f, f_rev, tol, k_se, n_max)
    result = ReconstructionResult("inconsistent", n_max, mode, confidence=confidence)
    diag = result.diagnostics

    try:
        for side, oracle, graph in (("forward", f, g), ("reversed", f_rev, rg)):
            check = validate_moment_oracle(graph, oracle, n_max, tol)
            if not check:
                raise OracleInvalid(f"{side} oracle is not a valid moment function",
                                    {"side": side, **check.witness})
        ratios = edge_ratios(g, f, f_rev, n_max, tol)
        diag["edge_ratios"] = {_edge_label(e): _render(v) for e, v in ratios.g.items()}
        diag["cycles_checked"] = len(ratios.cycles)

        fact = derive_factorization(g, ratios, f, f_rev, n_max, tol=tol)
        if gauge_twist is not None:
            fact = fact.rescaled(gauge_twist)
        diag["base_vertex"] = fact.base_vertex
        diag["h"] = {_edge_label(e): _render(v) for e, v in fact.h.items()}
        diag["h_tilde"] = {str(x): _render(v) for x, v in fact.h_tilde.items()}

        sites = residual_sites(g, f, f_rev, fact)
        gauge = recover_gauge(g, sites, n_max, tol)
        diag["delta"] = _render(gauge.delta)

        h_prime = {e: [gauge(n) * v for n, v in enumerate(vals)] for e, vals in fact.h.items()}
        ht_prime = {x: [gauge(n) * v for n, v in enumerate(vals)] for x, vals in fact.h_tilde.items()}

        laws = {}
        for site in sites:
            oracle = f if site.side == "forward" else f_rev
            x = site.vertex
            try:
                laws[(site.side, x)] = classify_vertex(
                    lambda c, oracle=oracle, x=x: oracle(x, c),
                    site.dim, [h_prime[e] for e in site.edges], ht_prime[x], n_max, tol,
                )
            except StageFailure as exc:
                exc.witness = {**_site_label(site), **exc.witness}
                raise
        diag["vertex_laws"] = {f"{side}:{x}": law.to_json() for (side, x), law in laws.items()}

        branches = {law.branch for law in laws.values()}
        if len(branches) != 1:
            split = {f"{side}:{x}": law.branch for (side, x), law in laws.items()}
            raise BranchMismatch("vertices disagree on the Dirichlet/deterministic branch",
                                 {"branches": split})
        branch = branches.pop()

        if branch == "deterministic":
            result.verdict = "deterministic"
            result.c = {}
            c_rev = {}
            for site in sites:
                law = laws[(site.side, site.vertex)]
                target = result.c if site.side == "forward" else c_rev
                for e, v in zip(site.edges, law.params):
                    target[e] = v
            diag["c_reversed"] = {_edge_label((y, x)): _render(v) for (x, y), v in c_rev.items()}
            return result

        beta = {}
        for site in sites:
            if site.side != "forward":
                continue
            for e, v in zip(site.edges, laws[("forward", site.vertex)].params):
                beta[e] = v
        for site in sites:
            if site.side != "reversed":
                continue
            for e, v in zip(site.edges, laws[("reversed", site.vertex)].params):
                if not values_equal(v, beta[e], tol):
                    raise FormMismatch(
                        f"forward and reversed fits disagree on the weight of {e!r}",
                        {"edge": list(e), "forward": beta[e], "reversed": v},
                    )
        null = True
        for x in g.vertices:
            total = laws[("forward", x)].total
            out_sum = sum(beta[e] for e in g.out_edges(x))
            in_sum = sum(beta[e] for e in g.in_edges(x))
            if not (values_equal(out_sum, total, tol) and values_equal(in_sum, total, tol)):
                null = False
        result.verdict = "dirichlet"
        result.beta = beta
        result.null_divergence = null
        return result

    except StageFailure as exc:
        result.verdict = "inconsistent"
        result.witness = {"stage": exc.stage, "error": type(exc).__name__,
                          "message": str(exc), **exc.witness}
        return result

