"""
Classifying moment functions
============================

``characterize`` takes a forward and a reversed moment oracle and decides
whether they come from independent Dirichlet rows with null divergence, a
fixed environment, or neither. Here it runs on three inputs: genuine
Dirichlet weights on a bidirected 5-cycle, a fixed environment on K3, and a
Dirichlet table with one entry altered.
"""

from fractions import Fraction

from revdirichlet.environment import make_environment, make_weights, reverse_environment, reversed_weights
from revdirichlet.graph import bidirected_cycle_graph, complete_graph, reverse_graph
from revdirichlet.moments import DeterministicOracle, DirichletOracle, TableOracle
from revdirichlet.reconstruction import characterize

c5 = bidirected_cycle_graph("abcde")
rotation = {("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")}
alpha = make_weights(c5, {e: Fraction(5, 3) if e in rotation else 1 for e in c5.edges})
f = DirichletOracle(c5, alpha)
f_rev = DirichletOracle(reverse_graph(c5), reversed_weights(c5, alpha))

result = characterize(c5, f, f_rev, n_max=4)
print("5-cycle:", result.verdict, "null divergence:", result.null_divergence)
print("  recovered weights equal the input:", result.beta == alpha.alpha)
print("  gauge Delta(0..4):", result.diagnostics["delta"])

# %%
k3 = complete_graph("abc")
env = make_environment(k3, {("a", "b"): "1/3", ("a", "c"): "2/3", ("b", "a"): "1/2",
                            ("b", "c"): "1/2", ("c", "a"): "3/4", ("c", "b"): "1/4"})
result = characterize(k3, DeterministicOracle.from_environment(env),
                      DeterministicOracle.from_environment(reverse_environment(k3, env)))
print("fixed environment:", result.verdict, {f"{x}->{y}": str(v) for (x, y), v in result.c.items()})

# %%
ones = make_weights(k3, 1)
table = TableOracle.from_oracle(DirichletOracle(k3, ones), 4)
bad = table.tampered("b", (1, 1), Fraction(1, 5))
result = characterize(k3, bad, DirichletOracle(k3, reversed_weights(k3, ones)))
print("tampered table:", result.verdict, "at stage", result.witness["stage"])
print("  ", result.witness["message"])
