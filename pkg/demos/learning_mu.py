"""
Learning the mixing weight of two branching rules
=================================================

Two instance families where the best weight between minchange and
maxchange sits on opposite sides of a threshold, then an exact sweep
over mu that finds every interval where the tree stays the same.
"""

import numpy as np

from branchlearn import erm
from branchlearn.bnb import run
from branchlearn.generators import FamilyParams, family_F, family_G, worst_case_mixture
from branchlearn.scoring import ScoringSpec


def size(q, mu):
    return run(q, ScoringSpec.pair("minchange", "maxchange", mu)).tree.size


# F is cheap below the threshold mu*, G is cheap above it
for n in (8, 12, 16):
    f, g = family_F(FamilyParams(n, 0.45)), family_G(FamilyParams(n, 0.45))
    print(n, "F:", size(f, 0.2), size(f, 0.9), " G:", size(g, 0.2), size(g, 0.9))

###############################################################################
# The sweep returns exact rational breakpoints and one tree per piece.

pc = erm.enumerate_behaviors(family_F(FamilyParams(12, 0.45)), "minchange", "maxchange")
for p in pc.pieces:
    print(p.interval, p.cost, p.fingerprint)

###############################################################################
# Mixing G(a) and F(b) leaves only the window (a, b) cheap for both.

mix = worst_case_mixture(14, 0.40, 0.45)
res = erm.erm_minimize(list(mix.support), "minchange", "maxchange")
for p in res.avg_cost.pieces:
    print(f"{float(p.interval.lo):.4f} .. {float(p.interval.hi):.4f}  avg size {p.cost}")
print("mu_hat:", res.mu_hat)

# a coarse grid agrees with the exact curve wherever it lands
grid = np.linspace(0, 1, 11)
print([res.avg_cost(mu) for mu in grid])
