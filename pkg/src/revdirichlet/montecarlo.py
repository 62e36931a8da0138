"""Sampling checks of the reversal law and of cross-site independence.

Environments are drawn in seeded chunks (see :mod:`revdirichlet.sampling`),
reversed exactly through their stationary law, and summarised by low-order
monomials of the reversed rows. Covariances between rows at different
vertices get block-jackknife standard errors.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .environment import (
    WeightFamily,
    environment_from_array,
    make_weights,
    reverse_batch,
    reversed_weights,
    sample_dirichlet_batch,
    weight_divergence_is_null,
)
from .errors import DegenerateSampler, NullDivergenceRequired, PreconditionViolated, UnknownSpec
from .graph import is_strongly_connected, reverse_graph
from .moments import dirichlet_moment
from .sampling import CHUNK_SIZE, chunk_bounds, chunk_generator, dirichlet_rows

EQUALITY_THRESHOLD = 4.0
DEPENDENCE_THRESHOLD = 5.0
N_BLOCKS = 100
# functionals varying less than this are treated as constant (rounding noise)
DEGENERATE_SD = 1e-12

NONDIRICHLET_SPECS = ("logit-normal", "mixture")


@dataclass
class MomentEstimate:
    vertex: object
    exponents: tuple
    estimate: float
    standard_error: float
    n_samples: int

    def to_json(self):
        return {"vertex": self.vertex, "exponents": list(self.exponents),
                "estimate": self.estimate, "standard_error": self.standard_error,
                "n_samples": self.n_samples}


def row_functionals(g, w, x):
    """First- and second-degree monomials of the row at ``x``.

    Returns (labels, values) with values of shape (n, n_functionals); a
    label is the exponent tuple aligned with ``g.out_edges(x)``.
    """
    idx = [g.edge_index(e) for e in g.out_edges(x)]
    d = len(idx)
    labels, cols = [], []
    for i in range(d):
        c = [0] * d
        c[i] = 1
        labels.append(tuple(c))
        cols.append(w[:, idx[i]])
    for i in range(d):
        for j in range(i, d):
            c = [0] * d
            c[i] += 1
            c[j] += 1
            labels.append(tuple(c))
            cols.append(w[:, idx[i]] * w[:, idx[j]])
    return labels, np.column_stack(cols)


def monomial(g, w, x, exponents):
    idx = [g.edge_index(e) for e in g.out_edges(x)]
    vals = np.ones(len(w))
    for j, k in zip(idx, exponents):
        if k:
            vals = vals * w[:, j] ** k
    return vals


def _mean_and_se(vals):
    n = len(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


def _check_alpha(g, alpha):
    if not isinstance(alpha, WeightFamily):
        alpha = make_weights(g, alpha)
    if not is_strongly_connected(g):
        raise PreconditionViolated("graph must be strongly connected")
    return alpha


def estimate_reversed_moments(g, alpha, targets, n_samples, seed):
    """Monte Carlo moments of the reversed Dirichlet environment.

    ``targets`` holds (vertex, exponents) with exponents aligned with the
    out-edges of the vertex in ``reverse_graph(g)``.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    alpha = _check_alpha(g, alpha)
    rg = reverse_graph(g)
    wr = reverse_batch(g, sample_dirichlet_batch(g, alpha, n_samples, seed))
    out = []
    for x, exponents in targets:
        exponents = tuple(exponents)
        est, se = _mean_and_se(monomial(rg, wr, x, exponents))
        out.append(MomentEstimate(x, exponents, est, se, n_samples))
    return out


def dirichlet_sampler(g, alpha):
    alpha = _check_alpha(g, alpha)

    def sample(n, seed):
        return sample_dirichlet_batch(g, alpha, n, seed)

    sample.constant = False
    return sample


def constant_sampler(env):
    w = env.as_array()

    def sample(n, seed):
        return np.tile(w, (n, 1))

    sample.constant = True
    return sample


DEFAULT_NONDIRICHLET_PARAMS = {
    "logit-normal": {"sigma": 1.5},
    "mixture": {"concentrations": (8.0, 0.5)},
}


def _nondirichlet_rows(rng, spec, d, n, params):
    if d == 1:
        return np.ones((n, 1))
    if spec == "logit-normal":
        z = params["sigma"] * rng.standard_normal((n, d))
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)
    if spec == "mixture":
        hi, lo = params["concentrations"]
        a1 = np.full(d, lo)
        a1[0] = hi
        a2 = np.full(d, lo)
        a2[-1] = hi
        pick = rng.random(n) < 0.5
        r1 = dirichlet_rows(rng, a1, n)
        r2 = dirichlet_rows(rng, a2, n)
        return np.where(pick[:, None], r1, r2)
    raise UnknownSpec(f"unknown fixture family {spec!r}; choose from {NONDIRICHLET_SPECS}")


def nondirichlet_sampler(g, spec, params=None):
    """Independent non-Dirichlet rows: logit-normal or a two-component Dirichlet mixture.

    Mixture rows put the large concentration on the first out-edge in one
    component and on the last in the other.
    """
    if spec not in NONDIRICHLET_SPECS:
        raise UnknownSpec(f"unknown fixture family {spec!r}; choose from {NONDIRICHLET_SPECS}")
    params = {**DEFAULT_NONDIRICHLET_PARAMS[spec], **(params or {})}
    cols = {x: [g.edge_index(e) for e in g.out_edges(x)] for x in g.vertices}

    def sample(n, seed):
        out = np.empty((n, len(g.edges)))
        for c, (lo, hi) in enumerate(chunk_bounds(n, CHUNK_SIZE)):
            rng = chunk_generator(seed, c, stream=1)
            for x in g.vertices:
                if cols[x]:
                    out[lo:hi, cols[x]] = _nondirichlet_rows(rng, spec, len(cols[x]), hi - lo, params)
        return out

    sample.constant = False
    return sample


def sample_nondirichlet_environment(g, spec, seed, params=None):
    return environment_from_array(g, nondirichlet_sampler(g, spec, params)(1, seed)[0])


@dataclass
class CrossSiteStatistic:
    vertices: tuple
    functionals: tuple
    covariance: float
    standard_error: float
    z: float

    def to_json(self):
        return {"vertices": list(self.vertices),
                "functionals": [list(f) for f in self.functionals],
                "covariance": self.covariance, "standard_error": self.standard_error,
                "z": self.z}


@dataclass
class IndependenceReport:
    threshold: float
    n_samples: int
    statistics: list = field(default_factory=list)

    @property
    def max_abs_z(self):
        return max((abs(s.z) for s in self.statistics), default=0.0)

    @property
    def dependent(self):
        return self.max_abs_z > self.threshold

    @property
    def worst(self):
        return max(self.statistics, key=lambda s: abs(s.z), default=None)

    def to_json(self):
        return {"verdict": "dependent" if self.dependent else "independence not rejected",
                "threshold": self.threshold, "n_samples": self.n_samples,
                "max_abs_z": self.max_abs_z,
                "statistics": [s.to_json() for s in self.statistics]}


def _block_sums(vals, n_blocks):
    edges = np.linspace(0, len(vals), n_blocks + 1).astype(int)
    return np.add.reduceat(vals, edges[:-1], axis=0), np.diff(edges)


def jackknife_covariances(a, b, n_blocks=N_BLOCKS):
    """Plug-in covariances of every column pair of ``a`` and ``b`` with block-jackknife SEs.

    Returns (cov, se), each of shape (a.shape[1], b.shape[1]).
    """
    n = len(a)
    n_blocks = min(n_blocks, n)
    sa, counts = _block_sums(a, n_blocks)
    sb, _ = _block_sums(b, n_blocks)
    edges = np.linspace(0, n, n_blocks + 1).astype(int)
    sab = np.stack([a[lo:hi].T @ b[lo:hi] for lo, hi in zip(edges[:-1], edges[1:])])
    ta, tb, tab = sa.sum(0), sb.sum(0), sab.sum(0)
    cov = tab / n - np.outer(ta / n, tb / n)
    m = (n - counts)[:, None]
    la = (ta - sa) / m
    lb = (tb - sb) / m
    lab = (tab - sab) / m[:, :, None]
    loo = lab - la[:, :, None] * lb[:, None, :]
    centred = loo - loo.mean(axis=0)
    se = np.sqrt((n_blocks - 1) / n_blocks * (centred ** 2).sum(axis=0))
    return cov, se


def independence_test(g, sampler, n_samples, seed, threshold=DEPENDENCE_THRESHOLD,
                      n_blocks=N_BLOCKS):
    """Covariances between monomials of reversed rows at distinct vertices.

    ``sampler(n, seed)`` returns an (n, |E|) array of environments on
    ``g``. A constant sampler yields exactly zero covariances; otherwise a
    functional with zero variance on a row with several entries is an error.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    rg = reverse_graph(g)
    w = sampler(n_samples, seed)
    constant = bool(np.all(w == w[0]))
    wr = reverse_batch(g, w[:1] if constant else w)
    features = {x: row_functionals(rg, wr, x) for x in rg.vertices}
    report = IndependenceReport(threshold, n_samples)
    verts = list(rg.vertices)
    if not constant:
        for x in verts:
            if len(rg.out_edges(x)) > 1 and np.any(features[x][1].std(axis=0) <= DEGENERATE_SD):
                raise DegenerateSampler(f"a reversed-row functional at {x!r} has zero variance")
    for i, x in enumerate(verts):
        for x2 in verts[i + 1:]:
            la, va = features[x]
            lb, vb = features[x2]
            if constant:
                cov = np.zeros((len(la), len(lb)))
                se = np.zeros_like(cov)
            else:
                cov, se = jackknife_covariances(va, vb, n_blocks)
            for p, fa in enumerate(la):
                for q, fb in enumerate(lb):
                    c, s = float(cov[p, q]), float(se[p, q])
                    z = 0.0 if s == 0 else c / s
                    report.statistics.append(CrossSiteStatistic((x, x2), (fa, fb), c, s, z))
    return report


@dataclass
class MomentCheck:
    vertex: object
    exponents: tuple
    expected: float
    estimate: float
    standard_error: float

    @property
    def z(self):
        if self.standard_error == 0:
            return 0.0 if self.estimate == self.expected else math.inf
        return (self.estimate - self.expected) / self.standard_error

    def to_json(self):
        return {"vertex": self.vertex, "exponents": list(self.exponents),
                "expected": self.expected, "estimate": self.estimate,
                "standard_error": self.standard_error, "z": self.z}


@dataclass
class ReversalLawReport:
    n_samples: int
    seed: int
    threshold: float
    moments: list
    independence: IndependenceReport

    @property
    def moments_pass(self):
        return all(abs(m.z) <= self.threshold for m in self.moments)

    @property
    def passed(self):
        return self.moments_pass and not self.independence.dependent

    def to_json(self):
        return {"verdict": "pass" if self.passed else "fail", "n_samples": self.n_samples,
                "seed": self.seed, "threshold": self.threshold,
                "moments": [m.to_json() for m in self.moments],
                "independence": self.independence.to_json()}


def verify_reversal_law(g, alpha, n_samples, seed, threshold=EQUALITY_THRESHOLD):
    """Reversed first and second moments against Dirichlet(reversed weights), plus independence.

    Moments and covariances are computed from the same seeded sample.
    """
    alpha = _check_alpha(g, alpha)
    if not weight_divergence_is_null(g, alpha, tol=1e-12):
        raise NullDivergenceRequired("the reversal law needs weights of null divergence")
    rg = reverse_graph(g)
    ralpha = reversed_weights(g, alpha)
    sampler = dirichlet_sampler(g, alpha)
    independence = independence_test(g, sampler, n_samples, seed, threshold=threshold)
    wr = reverse_batch(g, sampler(n_samples, seed))
    checks = []
    for x in rg.vertices:
        labels, vals = row_functionals(rg, wr, x)
        row = [float(a) for a in ralpha.row(x)]
        for lab, col in zip(labels, vals.T):
            est, se = _mean_and_se(col)
            checks.append(MomentCheck(x, lab, float(dirichlet_moment(row, lab)), est, se))
    return ReversalLawReport(n_samples, seed, threshold, checks, independence)


def calibrate_sample_size(g, sampler, pilot_samples, seed, target_z=10.0, round_to=1000):
    """Sample size at which the strongest pilot covariance sits ``target_z`` SEs from 0.

    Uses the pilot's per-sample standard deviation of the largest |z|
    statistic; returns (n, pilot_report).
    """
    pilot = independence_test(g, sampler, pilot_samples, seed, threshold=math.inf)
    worst = pilot.worst
    if worst is None or worst.covariance == 0:
        raise DegenerateSampler("pilot run found no covariance to calibrate against")
    sd = worst.standard_error * math.sqrt(pilot_samples)
    n = math.ceil((target_z * sd / abs(worst.covariance)) ** 2 / round_to) * round_to
    return max(n, 1000), pilot
