"""Generic tree search over finite-domain CSPs with score-based variable selection.

A node is a partial solution; branching on ``x_i`` creates one child per value of
``D_i`` in declared order. Each child first goes through a local fathom test
(does this node alone settle anything?) and then a global one (can it still beat
the incumbent?). Two presets ship: ``hard`` prunes any node with a violated
constraint and stops improving once a solution exists; ``none`` maximizes the
number of satisfied constraints and prunes by the count still attainable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, NamedTuple, Sequence

import numpy as np

from .bnb import NodeSelection, NodeState, SearchNode, SearchTree, _Frontier
from .scoring import ScoringSpec, argmax_row


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    relation: Callable[..., bool]
    kind: str = "custom"

    def holds(self, values: Sequence[Hashable]) -> bool:
        return bool(self.relation(*values))


def not_equal(i: int, j: int) -> Constraint:
    return Constraint((i, j), lambda a, b: a != b, "ne")


@dataclass(frozen=True, eq=False)
class CspInstance:
    """Variables with finite domains and constraints over scopes of variable indices."""

    names: tuple[str, ...]
    domains: tuple[tuple[Hashable, ...], ...]
    constraints: tuple[Constraint, ...]
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "domains", tuple(tuple(d) for d in self.domains))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.names) != len(self.domains):
            raise ValueError("one domain per variable")
        if any(len(d) == 0 for d in self.domains):
            raise ValueError("domains must be nonempty")
        for con in self.constraints:
            if any(not 0 <= v < self.n for v in con.scope):
                raise ValueError(f"constraint scope {con.scope} out of range")
        object.__setattr__(self, "_by_var", tuple(
            tuple(k for k, con in enumerate(self.constraints) if v in con.scope) for v in range(self.n)))

    @property
    def n(self) -> int:
        return len(self.names)

    def constraints_of(self, i: int) -> tuple[int, ...]:
        return self._by_var[i]

    def degree(self, i: int) -> int:
        """Number of constraints involving ``x_i``."""
        return len(self._by_var[i])

    def dynamic_degree(self, i: int, y: "PartialSolution") -> int:
        """Constraints involving ``x_i`` and at least one other unassigned variable."""
        return sum(1 for k in self._by_var[i]
                   if any(v != i and y.values[v] is None for v in self.constraints[k].scope))

    def status(self, y: "PartialSolution") -> tuple[int, int]:
        """Counts of (violated, satisfied) constraints whose scope is fully assigned."""
        bad = good = 0
        for con in self.constraints:
            vals = [y.values[v] for v in con.scope]
            if any(v is None for v in vals):
                continue
            if con.holds(vals):
                good += 1
            else:
                bad += 1
        return bad, good


@dataclass(frozen=True)
class PartialSolution:
    """Per-variable value, ``None`` for unassigned."""

    values: tuple[Hashable | None, ...]

    @classmethod
    def empty(cls, n: int) -> "PartialSolution":
        return cls((None,) * n)

    def assign(self, i: int, v: Hashable) -> "PartialSolution":
        if self.values[i] is not None:
            raise ValueError(f"variable {i} already assigned")
        vals = list(self.values)
        vals[i] = v
        return PartialSolution(tuple(vals))

    @property
    def complete(self) -> bool:
        return all(v is not None for v in self.values)

    def unassigned(self) -> list[int]:
        return [i for i, v in enumerate(self.values) if v is None]


# -- scoring rules -------------------------------------------------------------------

def score_deg_dom(inst: CspInstance, y: PartialSolution, i: int) -> float:
    return inst.degree(i) / len(inst.domains[i])


def score_ddeg_dom(inst: CspInstance, y: PartialSolution, i: int) -> float:
    return inst.dynamic_degree(i, y) / len(inst.domains[i])


def score_smallest_domain(inst: CspInstance, y: PartialSolution, i: int) -> float:
    return 1.0 / len(inst.domains[i])


CSP_RULES: dict[str, Callable[[CspInstance, PartialSolution, int], float]] = {
    "degdom": score_deg_dom,
    "ddegdom": score_ddeg_dom,
    "mindom": score_smallest_domain,
}


def _rule(name: str):
    try:
        return CSP_RULES[name]
    except KeyError:
        raise ValueError(f"unknown CSP rule {name!r}; choose from {sorted(CSP_RULES)}") from None


def select_csp_variable(spec: ScoringSpec, inst: CspInstance, y: PartialSolution) -> int:
    cands = y.unassigned()
    scores = _score_matrix(inst, y, cands, spec.rules)
    return cands[argmax_row(scores, spec.float_weights(), spec.exact_weights())]


def _score_matrix(inst: CspInstance, y: PartialSolution, cands: Sequence[int], rules: Sequence[str]) -> np.ndarray:
    fns = [_rule(r) for r in rules]
    return np.array([[fn(inst, y, i) for fn in fns] for i in cands], dtype=float).reshape(len(cands), len(fns))


# -- fathoming presets --------------------------------------------------------------------

class Fathoming(NamedTuple):
    """``local(inst, y) -> (fathom, value_if_solution)``; ``bound(inst, y)`` caps any completion;
    ``glob(inst, y, incumbent) -> fathom``."""

    local: Callable[[CspInstance, PartialSolution], tuple[bool, float | None]]
    glob: Callable[[CspInstance, PartialSolution, float], bool]
    bound: Callable[[CspInstance, PartialSolution], float]


def _hard_local(inst: CspInstance, y: PartialSolution) -> tuple[bool, float | None]:
    bad, _ = inst.status(y)
    if bad:
        return True, None
    if y.complete:
        return True, 0.0
    return False, None


def _soft_local(inst: CspInstance, y: PartialSolution) -> tuple[bool, float | None]:
    if y.complete:
        return True, float(inst.status(y)[1])
    return False, None


def _soft_bound(inst: CspInstance, y: PartialSolution) -> float:
    return float(len(inst.constraints) - inst.status(y)[0])


PRESETS = {
    "hard": Fathoming(_hard_local, lambda inst, y, inc: inc > -math.inf, lambda inst, y: 0.0),
    "none": Fathoming(_soft_local, lambda inst, y, inc: _soft_bound(inst, y) <= inc, _soft_bound),
}


@dataclass
class CspConfig:
    preset: str = "hard"
    node_selection: NodeSelection = NodeSelection.DEPTH_FIRST
    node_cap: int = 10**6
    cost_cap: int | None = None

    def __post_init__(self) -> None:
        self.node_selection = NodeSelection(self.node_selection)
        if self.preset not in PRESETS:
            raise ValueError(f"unknown fathoming preset {self.preset!r}")

    @property
    def kappa(self) -> int:
        return self.node_cap if self.cost_cap is None else self.cost_cap


class TsResult(NamedTuple):
    tree: SearchTree
    best: PartialSolution | None


def ts_run(inst: CspInstance, fathoming: Fathoming | None = None, spec: ScoringSpec | None = None,
           cfg: CspConfig | None = None, chooser: Callable | None = None) -> TsResult:
    """Tree search; returns the tree and the best solution found (``None`` if none)."""
    cfg = cfg or CspConfig()
    spec = spec or ScoringSpec.single("degdom")
    fath = fathoming or PRESETS[cfg.preset]
    if chooser is None:
        w, wx = spec.float_weights(), spec.exact_weights()
        chooser = lambda node, cands, scores: argmax_row(scores, w, wx)  # noqa: E731
    tree = SearchTree()
    frontier = _Frontier(cfg.node_selection)
    best: list[PartialSolution | None] = [None]

    def settle(node: SearchNode) -> bool:
        done, value = fath.local(inst, node.assignment)
        if done:
            if value is not None and value > tree.incumbent:
                tree.incumbent = value
                best[0] = node.assignment
                tree.incumbent_solution = node.assignment
            tree.fathom(node, "local" if value is None else "solution")
            return False
        if fath.glob(inst, node.assignment, tree.incumbent):
            tree.fathom(node, "global")
            return False
        return True

    y0 = PartialSolution.empty(inst.n)
    root = tree.add(None, None, y0, fath.bound(inst, y0))
    if settle(root):
        frontier.push_children([root])

    while True:
        nid = frontier.pop()
        if nid is None:
            break
        node = tree.nodes[nid]
        if node.state is not NodeState.OPEN:
            continue
        if tree.size >= cfg.node_cap:
            tree.capped = True
            break
        if fath.glob(inst, node.assignment, tree.incumbent):
            tree.fathom(node, "global")
            continue
        y = node.assignment
        key = ("scores", y.values, spec.rules)
        hit = inst._memo.get(key)
        if hit is None:
            cands = y.unassigned()
            hit = (cands, _score_matrix(inst, y, cands, spec.rules))
            inst._memo[key] = hit
        cands, scores = hit
        i = cands[chooser(node, cands, scores)]
        node.state = NodeState.BRANCHED
        node.branch_var = i
        kids = []
        for v in inst.domains[i]:
            yc = y.assign(i, v)
            kid = tree.add(node, (i, v), yc, fath.bound(inst, yc))
            if settle(kid):
                kids.append(kid)
        frontier.push_children(kids)
    return TsResult(tree, best[0])


# -- graph coloring and file formats ------------------------------------------------------------

def encode_graph_coloring(edges: Sequence[tuple[int, int]], k: int, n_vertices: int | None = None,
                          names: Sequence[str] | None = None) -> CspInstance:
    """One variable per vertex with colors ``0..k-1``; one not-equal constraint per edge."""
    if k < 1:
        raise ValueError("need at least one color")
    if n_vertices is None:
        n_vertices = len(names) if names is not None else 1 + max((max(e) for e in edges), default=-1)
    names = tuple(names) if names is not None else tuple(f"x{v + 1}" for v in range(n_vertices))
    return CspInstance(names, [tuple(range(k))] * n_vertices, [not_equal(u, v) for u, v in edges])


def brute_force_satisfiable(inst: CspInstance) -> bool:
    for vals in product(*inst.domains):
        if all(con.holds([vals[v] for v in con.scope]) for con in inst.constraints):
            return True
    return False


def dumps_csp(inst: CspInstance) -> str:
    lines = [f"var {name} " + " ".join(str(v) for v in dom) for name, dom in zip(inst.names, inst.domains)]
    for con in inst.constraints:
        if con.kind != "ne":
            raise ValueError("only not-equal constraints can be written to a file")
        lines.append(f"ne {inst.names[con.scope[0]]} {inst.names[con.scope[1]]}")
    return "\n".join(lines) + "\n"


def _parse_value(tok: str) -> Hashable:
    return int(tok) if re.fullmatch(r"-?\d+", tok) else tok


def loads_csp(text: str) -> CspInstance:
    """Parse ``var <name> <values...>`` / ``ne <a> <b>`` lines, or DIMACS ``p edge`` graphs.

    A DIMACS graph needs a color count; it is read from a ``c colors <k>``
    comment and defaults to 3.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if any(ln.startswith("p ") for ln in lines):
        return _loads_dimacs(lines)
    names: list[str] = []
    domains: list[tuple] = []
    pairs: list[tuple[str, str]] = []
    for ln in lines:
        if ln.startswith("#"):
            continue
        key, *rest = ln.split()
        if key == "var":
            if not rest:
                raise ValueError("var record needs a name")
            names.append(rest[0])
            domains.append(tuple(_parse_value(t) for t in rest[1:]))
        elif key == "ne":
            if len(rest) != 2:
                raise ValueError("ne record needs exactly two variables")
            pairs.append((rest[0], rest[1]))
        else:
            raise ValueError(f"unknown CSP record {key!r}")
    index = {name: k for k, name in enumerate(names)}
    try:
        cons = [not_equal(index[a], index[b]) for a, b in pairs]
    except KeyError as exc:
        raise ValueError(f"undeclared variable {exc.args[0]!r}") from None
    return CspInstance(names, domains, cons)


def _loads_dimacs(lines: Sequence[str]) -> CspInstance:
    n, k, edges = 0, 3, []
    for ln in lines:
        tok = ln.split()
        if tok[0] == "c" and len(tok) >= 3 and tok[1] == "colors":
            k = int(tok[2])
        elif tok[0] == "p":
            n = int(tok[2])
        elif tok[0] == "e":
            edges.append((int(tok[1]) - 1, int(tok[2]) - 1))
    return encode_graph_coloring(edges, k, n)


def random_graph(n_vertices: int, p: float, seed: int) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    return [(u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices) if rng.random() < p]


EXAMPLE_GRAPH_EDGES = ((0, 1), (0, 2), (1, 2), (2, 3))


__all__ = [
    "Constraint", "CspInstance", "PartialSolution", "CspConfig", "Fathoming", "PRESETS", "TsResult",
    "CSP_RULES", "ts_run", "score_deg_dom", "score_ddeg_dom", "score_smallest_domain",
    "select_csp_variable", "encode_graph_coloring", "brute_force_satisfiable", "dumps_csp",
    "loads_csp", "not_equal", "random_graph", "EXAMPLE_GRAPH_EDGES",
]

