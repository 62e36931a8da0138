"""Time reversal of random walks in Dirichlet environment on finite digraphs.

Submodules: :mod:`~revdirichlet.graph`, :mod:`~revdirichlet.flows`,
:mod:`~revdirichlet.environment`, :mod:`~revdirichlet.moments`,
:mod:`~revdirichlet.reconstruction`, :mod:`~revdirichlet.montecarlo` and the
command-line front end :mod:`~revdirichlet.cli`.
"""

from .environment import (
    Environment,
    WeightFamily,
    make_environment,
    make_weights,
    reverse_environment,
    reversed_weights,
    sample_dirichlet_environment,
    stationary_distribution,
    weight_divergence_is_null,
)
from .flows import decompose_into_cycles, divergence, enumerate_null_flows
from .graph import (
    DirectedGraph,
    build_graph,
    complete_graph,
    cycle_graph,
    disjoint_paths_to_target,
    is_strongly_connected,
    is_two_connected,
    reverse_graph,
)
from .moments import (
    DeterministicOracle,
    DirichletOracle,
    EmpiricalOracle,
    TableOracle,
    check_compatibility,
    dirichlet_moment,
    rising_factorial,
    validate_moment_oracle,
)
from .montecarlo import (
    estimate_reversed_moments,
    independence_test,
    sample_nondirichlet_environment,
    verify_reversal_law,
)
from .reconstruction import characterize, classify_vertex, recover_gauge

__version__ = "0.1.0"
