"""Branch-and-bound over binary variables with score-based variable selection."""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Hashable, NamedTuple, Sequence

import numpy as np

from .lp import CMP_TOL, LpSolution
from .milp import MilpInstance, fractional_vars, is_integral, solve_relaxation
from .scoring import ScoreContext, ScoringSpec, argmax_row, base_scores

DEFAULT_NODE_CAP = 10**6


class NodeSelection(str, Enum):
    BEST_BOUND = "bestbound"
    DEPTH_FIRST = "depthfirst"


class FathomMode(str, Enum):
    FULL = "full"
    LOCAL_ONLY = "localonly"


class NodeState(str, Enum):
    OPEN = "open"
    FATHOMED = "fathomed"
    BRANCHED = "branched"


@dataclass
class BnbConfig:
    """Run settings. ``cost_cap`` defaults to ``node_cap``; ``partial_pivots`` enables
    budgeted child solves inside the scoring rules."""

    node_selection: NodeSelection = NodeSelection.BEST_BOUND
    fathom_mode: FathomMode = FathomMode.FULL
    node_cap: int = DEFAULT_NODE_CAP
    cost_cap: int | None = None
    partial_pivots: int | None = None

    def __post_init__(self) -> None:
        self.node_selection = NodeSelection(self.node_selection)
        self.fathom_mode = FathomMode(self.fathom_mode)
        if self.node_cap < 1 or (self.cost_cap is not None and self.cost_cap < 1):
            raise ValueError("caps must be >= 1")

    @property
    def kappa(self) -> int:
        return self.node_cap if self.cost_cap is None else self.cost_cap


@dataclass
class SearchNode:
    id: int
    parent: int | None
    depth: int
    label: tuple[int, Hashable] | None
    assignment: Any
    bound: float
    lp: LpSolution | None = None
    state: NodeState = NodeState.OPEN
    branch_var: int | None = None
    children: list[int] = field(default_factory=list)
    fathom_reason: str | None = None
    incumbent_at_fathom: float | None = None


@dataclass
class SearchTree:
    """Nodes in creation order plus the incumbent value ``c*``."""

    nodes: list[SearchNode] = field(default_factory=list)
    incumbent: float = -math.inf
    incumbent_solution: Any = None
    capped: bool = False

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def root(self) -> SearchNode:
        return self.nodes[0]

    def add(self, parent: SearchNode | None, label, assignment, bound: float, lp=None) -> SearchNode:
        node = SearchNode(len(self.nodes), None if parent is None else parent.id,
                          0 if parent is None else parent.depth + 1, label, assignment, bound, lp)
        self.nodes.append(node)
        if parent is not None:
            parent.children.append(node.id)
        return node

    def fathom(self, node: SearchNode, reason: str) -> None:
        node.state = NodeState.FATHOMED
        node.fathom_reason = reason
        node.incumbent_at_fathom = self.incumbent

    def canonical(self) -> str:
        """Tree shape and branching variables, independent of exploration order."""

        def enc(node: SearchNode) -> str:
            if not node.children:
                return "."
            kids = ",".join(f"{self.nodes[c].label[1]}:{enc(self.nodes[c])}" for c in node.children)
            return f"{node.branch_var}[{kids}]"

        return enc(self.root)

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def paths(self) -> set[tuple]:
        """Every root-to-node sequence of branch labels."""
        out = set()
        for node in self.nodes:
            path = []
            cur = node
            while cur.label is not None:
                path.append(cur.label)
                cur = self.nodes[cur.parent]
            out.add(tuple(reversed(path)))
        return out

    def dump(self) -> str:
        """One line per node: ``id parent var value status lp_obj``."""
        lines = []
        for nd in self.nodes:
            var, val = ("-", "-") if nd.label is None else nd.label
            status = nd.state.value if nd.fathom_reason is None else f"{nd.state.value}:{nd.fathom_reason}"
            obj = "infeasible" if nd.bound == -math.inf else repr(float(nd.bound))
            lines.append(f"{nd.id} {-1 if nd.parent is None else nd.parent} {var} {val} {status} {obj}")
        return "\n".join(lines) + "\n"


class _Frontier:
    """Open leaves under best-bound or depth-first selection."""

    def __init__(self, policy: NodeSelection):
        self.policy = policy
        self._heap: list[tuple[float, int]] = []
        self._stack: list[int] = []

    def push_children(self, nodes: Sequence[SearchNode]) -> None:
        if self.policy is NodeSelection.BEST_BOUND:
            for nd in nodes:
                heapq.heappush(self._heap, (-nd.bound, nd.id))
        else:
            # the first-created child (value 0 for binaries) is explored first
            self._stack.extend(nd.id for nd in reversed(nodes))

    def pop(self) -> int | None:
        if self.policy is NodeSelection.BEST_BOUND:
            return heapq.heappop(self._heap)[1] if self._heap else None
        return self._stack.pop() if self._stack else None


def node_select(tree: SearchTree, policy: NodeSelection) -> int:
    """Pick an open leaf: max bound then lowest id, or the newest leaf preferring value 0."""
    open_ids = [nd.id for nd in tree.nodes if nd.state is NodeState.OPEN]
    if not open_ids:
        raise ValueError("no open leaf to select")
    if NodeSelection(policy) is NodeSelection.BEST_BOUND:
        return min(open_ids, key=lambda k: (-tree.nodes[k].bound, k))
    newest_parent = tree.nodes[max(open_ids)].parent
    return min(k for k in open_ids if tree.nodes[k].parent == newest_parent)


Chooser = Callable[[SearchNode, Sequence[int], np.ndarray], int]


def spec_chooser(spec: ScoringSpec) -> Chooser:
    w, wx = spec.float_weights(), spec.exact_weights()
    return lambda node, candidates, scores: argmax_row(scores, w, wx)


def node_scores(q: MilpInstance, tree: SearchTree, node: SearchNode, rules: tuple[str, ...],
                partial_pivots: int | None) -> tuple[list[int], np.ndarray]:
    """Candidates and their base scores at ``node``, memoized by assignment."""
    key = ("scores", node.assignment.values, rules, partial_pivots)
    hit = q._memo.get(key)
    if hit is None:
        candidates = fractional_vars(node.lp, q)
        ctx = ScoreContext(q, node.assignment, node.lp, candidates, tree, partial_pivots)
        hit = (candidates, base_scores(rules, ctx))
        q._memo[key] = hit
    return hit


class BnbResult(NamedTuple):
    tree: SearchTree
    optimum: float | None


def run(q: MilpInstance, spec: ScoringSpec, cfg: BnbConfig | None = None,
        chooser: Chooser | None = None) -> BnbResult:
    """Branch and bound on ``q``.

    Args:
        q: instance with at least one binary variable.
        spec: scoring rules and weights used for variable selection.
        cfg: node selection, fathoming mode and caps.
        chooser: optional override mapping (node, candidates, score matrix) to
            the chosen row; the ERM ledger hooks in here.

    Returns:
        The search tree and the optimal value, or ``None`` if no integral
        solution was found.
    """
    cfg = cfg or BnbConfig()
    if not q.binary:
        raise ValueError("instance has no binary variables")
    choose = chooser or spec_chooser(spec)
    full = cfg.fathom_mode is FathomMode.FULL
    tree = SearchTree()
    frontier = _Frontier(cfg.node_selection)

    def settle(node: SearchNode) -> bool:
        """Fathom ``node`` if possible; True when it stays open."""
        sol = node.lp
        if not sol.is_optimal:
            tree.fathom(node, "infeasible")
            return False
        if is_integral(sol, q):
            if sol.objective > tree.incumbent:
                tree.incumbent = sol.objective
                tree.incumbent_solution = sol.x
            tree.fathom(node, "integral")
            return False
        if full and sol.objective <= tree.incumbent + CMP_TOL:
            tree.fathom(node, "bound")
            return False
        return True

    root_a = q.root()
    root_lp = solve_relaxation(q, root_a)
    root = tree.add(None, None, root_a, root_lp.objective, root_lp)
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
        if full and node.bound <= tree.incumbent + CMP_TOL:
            tree.fathom(node, "bound")
            continue
        candidates, scores = node_scores(q, tree, node, spec.rules, cfg.partial_pivots)
        i = candidates[choose(node, candidates, scores)]
        node.state = NodeState.BRANCHED
        node.branch_var = i
        kids = []
        for v in (0, 1):
            a = node.assignment.fix(i, v)
            sol = solve_relaxation(q, a)
            kid = tree.add(node, (i, v), a, sol.objective, sol)
            if settle(kid):
                kids.append(kid)
        frontier.push_children(kids)

    optimum = tree.incumbent if tree.incumbent > -math.inf else None
    return BnbResult(tree, optimum)


def cost_tree_size(tree: SearchTree, kappa: int) -> int:
    """Tree size capped at ``kappa``."""
    return min(tree.size, kappa)


__all__ = [
    "BnbConfig", "BnbResult", "FathomMode", "NodeSelection", "NodeState", "SearchNode",
    "SearchTree", "cost_tree_size", "node_select", "run", "spec_chooser",
]
