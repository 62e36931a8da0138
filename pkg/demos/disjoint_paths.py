"""
Two paths that meet only at the target
======================================

On a 2-connected graph, any two start vertices can reach a target along
paths whose only common vertex is the target. The construction starts from
two shortest paths and reroutes around their junction until the shared
tail is gone.
"""

import random

from revdirichlet.graph import build_graph, disjoint_paths_to_target, is_two_connected, shortest_path

g = build_graph(range(5), [(0, 2), (1, 2), (2, 4), (1, 3), (3, 4), (4, 0), (4, 1), (0, 3),
                           (2, 1), (3, 0), (4, 3), (2, 0)])
print("2-connected:", is_two_connected(g))
print("shortest paths to 4:", shortest_path(g, 0, 4), shortest_path(g, 1, 4))
print("after rerouting:    ", *disjoint_paths_to_target(g, 0, 1, 4))

# %%
rng = random.Random(0)
shown = 0
while shown < 5:
    n = rng.randint(4, 8)
    verts = list(range(n))
    h = build_graph(verts, [(x, y) for x in verts for y in verts if x != y and rng.random() < 0.45])
    if not is_two_connected(h):
        continue
    x1, x2, y = rng.sample(verts, 3)
    p1, p2 = disjoint_paths_to_target(h, x1, x2, y)
    print(f"|V|={n} |E|={len(h.edges):2d}  {p1}  {p2}")
    shown += 1
