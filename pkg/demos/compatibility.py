"""
Compatibility over null-divergence flows
========================================

For every nonnegative integer flow N with zero divergence, the product of
forward moments must equal the product of reversed moments. Weights with
null divergence pass at every flow; moving weight onto one edge breaks the
identity, and the first failing flow is a witness.
"""

from revdirichlet.environment import make_weights, reversed_weights
from revdirichlet.flows import decompose_into_cycles, enumerate_null_flows, flow_to_json
from revdirichlet.graph import complete_graph, reverse_graph
from revdirichlet.moments import DirichletOracle, check_compatibility

g = complete_graph("abc")
rg = reverse_graph(g)

flows = enumerate_null_flows(g, 4)
print(len(flows), "null-divergence flows with total <= 4 on K3")
for f in flows[:8]:
    print("  ", flow_to_json(g, f), "=", decompose_into_cycles(g, f))

# %%
for name, alpha in [
    ("all ones", make_weights(g, 1)),
    ("alpha(a, b) = 2", make_weights(g, {e: 2 if e == ("a", "b") else 1 for e in g.edges})),
]:
    report = check_compatibility(g, DirichletOracle(g, alpha),
                                 DirichletOracle(rg, reversed_weights(g, alpha)), max_total=4)
    print(f"{name:16s} -> {'compatible' if report.passed else 'incompatible'}"
          f" over {len(report.records)} flows")
    if report.witness is not None:
        w = report.witness
        print("   witness", flow_to_json(g, w.flow), "forward", w.left, "reversed", w.right)
