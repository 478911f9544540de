"""
Branch and bound on a small knapsack
====================================

Solve the 7-item knapsack with the most-fractional rule and best-bound
node selection, then print the search tree node by node.
"""

from branchlearn.bnb import BnbConfig, run
from branchlearn.generators import knapsack_example
from branchlearn.milp import solve_relaxation
from branchlearn.scoring import ScoringSpec

q = knapsack_example()
print(q.c, q.A[0], q.rhs)

# the LP relaxation at the root takes items greedily by value per weight
root = solve_relaxation(q, q.root())
print("root LP:", root.objective, root.x)

res = run(q, ScoringSpec.single("mostfrac"), BnbConfig(node_selection="bestbound"))
print("optimum:", res.optimum, "nodes:", res.tree.size)

# columns: id, parent, branch var, branch value, state, LP bound
print(res.tree.dump())

# the same tree with depth-first selection finds the same optimum
dfs = run(q, ScoringSpec.single("mostfrac"), BnbConfig(node_selection="depthfirst"))
print("depth first:", dfs.optimum, dfs.tree.size)
