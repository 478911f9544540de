"""
Tree search for graph coloring
==============================

Color a 4-vertex graph with deg/dom ordering, then sweep the weight
between static and dynamic degree on a random graph.
"""

from branchlearn import csp, erm
from branchlearn.scoring import ScoringSpec

inst = csp.encode_graph_coloring(csp.EXAMPLE_GRAPH_EDGES, 3)
print(csp.dumps_csp(inst))

res = csp.ts_run(inst, spec=ScoringSpec.single("degdom"))
print("first branch:", inst.names[res.tree.root.branch_var])
print("coloring:", dict(zip(inst.names, res.best.values)), "nodes:", res.tree.size)

# two colors are not enough for a triangle
print(csp.ts_run(csp.encode_graph_coloring([(0, 1), (1, 2), (0, 2)], 2)).best)

###############################################################################
# Search effort as a function of the deg/dom vs ddeg/dom weight.

g = csp.encode_graph_coloring(csp.random_graph(9, 0.5, seed=3), 3, 9)
for p in erm.enumerate_behaviors(g, "degdom", "ddegdom").pieces:
    print(p.interval, p.cost)

# "none" keeps searching for the assignment violating the fewest constraints
best = csp.ts_run(g, cfg=csp.CspConfig(preset="none"))
print("constraints satisfied:", best.tree.incumbent, "of", len(g.constraints))
