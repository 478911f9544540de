"""Branch and bound with learnable mixtures of variable-selection rules.

Modules: ``lp`` (bounded-variable simplex), ``milp`` (instances and relaxations),
``scoring`` (branching rules), ``bnb`` (tree search), ``erm`` (exact sweeps over
the mixing weight), ``generators`` (instance families), ``bounds``
(generalization formulas), ``csp`` (tree search for constraint satisfaction),
``cli`` (experiment driver).
"""

from .bnb import BnbConfig, FathomMode, NodeSelection, SearchTree, run
from .erm import PiecewiseCost, enumerate_behaviors, erm_minimize, grid_sweep
from .lp import LinearProgram, LpStatus, partial_solve, solve
from .milp import MilpInstance, PartialAssignment
from .scoring import ScoringSpec

__version__ = "0.1.0"

__all__ = [
    "BnbConfig", "FathomMode", "NodeSelection", "SearchTree", "run", "PiecewiseCost",
    "enumerate_behaviors", "erm_minimize", "grid_sweep", "LinearProgram", "LpStatus",
    "partial_solve", "solve", "MilpInstance", "PartialAssignment", "ScoringSpec",
]
