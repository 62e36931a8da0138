"""
Calibrate and freeze the falsification fixtures
===============================================

The effect size of a dependence between reversed rows is not known in
advance. A pilot run measures the strongest cross-site covariance, the
sample size is chosen so that this covariance would sit about 10 standard
errors from zero, and a run at that size with a fixed seed is frozen into
``tests/fixtures/falsification.json``. The tests replay the frozen run and
compare the report hash byte for byte.

Run from the repository root::

    python3 demos/calibrate_falsification.py
"""

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from revdirichlet.environment import make_environment, make_weights
from revdirichlet.graph import complete_graph
from revdirichlet.montecarlo import (
    DEPENDENCE_THRESHOLD,
    calibrate_sample_size,
    constant_sampler,
    dirichlet_sampler,
    independence_test,
    nondirichlet_sampler,
)

PILOT_SEED = 1
PILOT_SAMPLES = 20_000
FROZEN_SEED = 20240601
TARGET_Z = 10.0
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "falsification.json"

k3 = complete_graph("abc")


def report_digest(report):
    text = json.dumps(report.to_json(), indent=2, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def samplers():
    yield "logit-normal", nondirichlet_sampler(k3, "logit-normal")
    yield "mixture", nondirichlet_sampler(k3, "mixture")
    # non-null divergence Dirichlet weights: alpha(a, b) = 3, all others 1
    alpha = make_weights(k3, {e: 3 if e == ("a", "b") else 1 for e in k3.edges})
    yield "dirichlet-nonnull", dirichlet_sampler(k3, alpha)


# %%
# Dependent cases: pilot, calibrate, freeze.
cases = {}
for name, sampler in samplers():
    n, pilot = calibrate_sample_size(k3, sampler, PILOT_SAMPLES, PILOT_SEED, target_z=TARGET_Z)
    frozen = independence_test(k3, sampler, n, FROZEN_SEED)
    worst = frozen.worst
    print(f"{name:18s} pilot max|z| = {pilot.max_abs_z:6.2f}  ->  N = {n:6d}, "
          f"frozen max|z| = {frozen.max_abs_z:6.2f}")
    cases[name] = {
        "pilot": {"seed": PILOT_SEED, "n_samples": PILOT_SAMPLES,
                  "max_abs_z": pilot.max_abs_z, "worst": pilot.worst.to_json()},
        "n_samples": n,
        "seed": FROZEN_SEED,
        "max_abs_z": frozen.max_abs_z,
        "worst": worst.to_json(),
        "dependent": frozen.dependent,
        "sha256": report_digest(frozen),
    }

# %%
# Deterministic control: a constant environment has exactly zero covariances.
env = make_environment(k3, {("a", "b"): Fraction(1, 3), ("a", "c"): Fraction(2, 3),
                            ("b", "a"): Fraction(1, 2), ("b", "c"): Fraction(1, 2),
                            ("c", "a"): Fraction(3, 4), ("c", "b"): Fraction(1, 4)})
n = max(c["n_samples"] for c in cases.values())
frozen = independence_test(k3, constant_sampler(env), n, FROZEN_SEED)
print(f"{'deterministic':18s} N = {n:6d}, max|z| = {frozen.max_abs_z}")
cases["deterministic"] = {
    "environment": {f"{x}->{y}": str(v) for (x, y), v in env.omega.items()},
    "n_samples": n, "seed": FROZEN_SEED, "max_abs_z": frozen.max_abs_z,
    "dependent": frozen.dependent, "sha256": report_digest(frozen),
}

fixture = {"graph": "K3 on a, b, c", "threshold": DEPENDENCE_THRESHOLD,
           "target_z": TARGET_Z, "cases": cases}
OUT.write_text(json.dumps(fixture, indent=2) + "\n")
print(f"wrote {OUT}")
