"""Seeded counter-based random streams and Gamma/Dirichlet variates.

Samples are generated in fixed-size chunks; chunk ``c`` of a stream seeded
with ``seed`` always uses the Philox key derived from ``(seed, c)``, so
sample ``k`` does not depend on how the chunks are scheduled.
"""

import numpy as np

CHUNK_SIZE = 8192


def chunk_generator(seed, chunk_index, stream=0):
    ss = np.random.SeedSequence([int(seed), int(stream), int(chunk_index)])
    return np.random.Generator(np.random.Philox(ss))


def chunk_bounds(n_samples, chunk_size=CHUNK_SIZE):
    return [(start, min(start + chunk_size, n_samples))
            for start in range(0, n_samples, chunk_size)]


def log_standard_gamma(rng, shape, size):
    """Logarithm of Gamma(shape, 1) variates, Marsaglia-Tsang rejection.

    ``shape`` is broadcast against ``size``. For shape < 1 the variate of
    shape + 1 is boosted by ``U ** (1 / shape)``; working in logs keeps the
    result finite when that factor underflows.
    """
    shape = np.broadcast_to(np.asarray(shape, dtype=float), size)
    if np.any(shape <= 0):
        raise ValueError("gamma shape must be positive")
    small = shape < 1.0
    a = np.where(small, shape + 1.0, shape)
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(size, dtype=float)
    pending = np.ones(size, dtype=bool)
    while pending.any():
        idx = np.nonzero(pending)
        dd, cc = d[idx], c[idx]
        x = rng.standard_normal(dd.shape)
        v = 1.0 + cc * x
        u = rng.random(dd.shape)
        ok = v > 0
        v3 = np.where(ok, v, 1.0) ** 3
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = ok & (
                (u < 1.0 - 0.0331 * x ** 4)
                | (np.log(u) < 0.5 * x * x + dd * (1.0 - v3 + np.log(v3)))
            )
        hit = tuple(i[accept] for i in idx)
        out[hit] = np.log(dd[accept] * v3[accept])
        pending[hit] = False
    if small.any():
        idx = np.nonzero(small)
        u = rng.random(len(idx[0]))
        # 1 - u lies in (0, 1], so its log is finite
        out[idx] += np.log1p(-u) / shape[idx]
    return out


def dirichlet_rows(rng, alpha, n):
    """``n`` draws from Dirichlet(alpha) as an (n, len(alpha)) array."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or len(alpha) == 0:
        raise ValueError("alpha must be a nonempty vector")
    if len(alpha) == 1:
        return np.ones((n, 1))
    logs = log_standard_gamma(rng, alpha, (n, len(alpha)))
    logs -= logs.max(axis=1, keepdims=True)
    w = np.exp(logs)
    return w / w.sum(axis=1, keepdims=True)
