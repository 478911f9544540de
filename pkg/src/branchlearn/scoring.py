"""Variable-selection scoring rules and their convex combinations.

A score is computed for one candidate variable at one node. All rules here
are path-wise: they read the node's own LP solution and the LP values of its
two would-be children, never the rest of the tree. Combined scores are
compared in floating point first; near-ties are settled with exact rational
arithmetic so that the selection agrees with the breakpoints computed by the
ERM sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .lp import LpSolution, partial_solve
from .milp import MilpInstance, PartialAssignment, solve_relaxation

PRODUCT_GAMMA = 1e-6
LINEAR_DEFAULT_MU = 0.5
_NEAR_TIE = 1e-9


@dataclass
class ScoreContext:
    """Everything a rule may look at when scoring candidate ``i`` at one node.

    ``tree`` is carried only so callers can show that rules ignore it.
    ``partial_pivots`` switches child values from full solves to a budgeted
    warm-started partial solve.
    """

    q: MilpInstance
    assignment: PartialAssignment
    lp: LpSolution
    candidates: Sequence[int]
    tree: Any = None
    partial_pivots: int | None = None
    _children: dict = field(default_factory=dict, repr=False)

    @property
    def x(self) -> np.ndarray:
        return self.lp.x

    @property
    def objective(self) -> float:
        return self.lp.objective

    def child_solution(self, i: int, v: int) -> LpSolution:
        """Full LP solution of the child fixing ``x_i = v``."""
        return solve_relaxation(self.q, self.assignment.fix(i, v))

    def child_value(self, i: int, v: int) -> float | None:
        """LP value of the child (``None`` when infeasible)."""
        key = (i, v)
        if key in self._children:
            return self._children[key]
        if self.partial_pivots is None:
            sol = self.child_solution(i, v)
            val = sol.objective if sol.is_optimal else None
        else:
            val = _partial_child_value(self, i, v)
        self._children[key] = val
        return val

    def diff(self, i: int, v: int) -> float:
        """Bound decrease ``c_Q - c_child``, or ``||c||_1 + 1`` for an infeasible child."""
        val = self.child_value(i, v)
        return self.q.big_value if val is None else self.objective - val


def _partial_child_value(ctx: ScoreContext, i: int, v: int) -> float | None:
    key = ("partial", ctx.assignment.values, i, v, ctx.partial_pivots)
    memo = ctx.q._memo
    if key not in memo:
        lp = ctx.q.relaxation(ctx.assignment.fix(i, v))
        sol, proven = partial_solve(lp, ctx.x, ctx.partial_pivots)
        if sol.is_infeasible:
            memo[key] = None
        else:
            # the parent bound is valid for the child, so never report more
            memo[key] = sol.objective if proven else min(sol.objective, ctx.objective)
    return memo[key]


# -- base rules --------------------------------------------------------------

def score_most_fractional(ctx: ScoreContext, i: int) -> float:
    xi = float(ctx.x[i])
    return min(1.0 - xi, xi)


def score_linear(ctx: ScoreContext, i: int, mu: float = LINEAR_DEFAULT_MU) -> float:
    """``(1 - mu) * max(diffs) + mu * min(diffs)``."""
    d_minus, d_plus = ctx.diff(i, 0), ctx.diff(i, 1)
    return (1.0 - mu) * max(d_minus, d_plus) + mu * min(d_minus, d_plus)


def score_product(ctx: ScoreContext, i: int) -> float:
    return max(ctx.diff(i, 0), PRODUCT_GAMMA) * max(ctx.diff(i, 1), PRODUCT_GAMMA)


def binary_entropy(x: np.ndarray) -> np.ndarray:
    """Entropy in bits, with ``e(0) = e(1) = 0``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = np.zeros_like(x)
    inner = (x > 1e-12) & (x < 1.0 - 1e-12)
    p = x[inner]
    out[inner] = -p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p)
    return out


def score_entropic(ctx: ScoreContext, i: int) -> float:
    """Negated expected total entropy of the two children's LP solutions.

    An infeasible child contributes an entropy sum of 0.
    """
    xi = float(ctx.x[i])
    total = 0.0
    for v, weight in ((0, 1.0 - xi), (1, xi)):
        sol = ctx.child_solution(i, v)
        if sol.is_optimal:
            total += weight * float(binary_entropy(sol.x).sum())
    return -total


def score_min_change(ctx: ScoreContext, i: int) -> float:
    return min(ctx.diff(i, 0), ctx.diff(i, 1))


def score_max_change(ctx: ScoreContext, i: int) -> float:
    return max(ctx.diff(i, 0), ctx.diff(i, 1))


Rule = Callable[[ScoreContext, int], float]

RULES: dict[str, Rule] = {
    "mostfrac": score_most_fractional,
    "linear": score_linear,
    "product": score_product,
    "entropic": score_entropic,
    "minchange": score_min_change,
    "maxchange": score_max_change,
}


def get_rule(name: str) -> Rule:
    """Look up a rule id; ``linear:<mu>`` fixes the linear rule's own parameter."""
    if name.startswith("linear:"):
        mu = float(name.split(":", 1)[1])
        if not 0.0 <= mu <= 1.0:
            raise ValueError("linear rule parameter must be in [0, 1]")
        return lambda ctx, i: score_linear(ctx, i, mu)
    try:
        return RULES[name]
    except KeyError:
        raise ValueError(f"unknown scoring rule {name!r}; choose from {sorted(RULES)}") from None


# -- combinations --------------------------------------------------------------

Number = float | Fraction


@dataclass(frozen=True)
class ScoringSpec:
    """Base rule ids plus simplex weights. For two rules ``mu`` weights the first.

    ``mu`` may be a ``Fraction`` (the ERM sweep runs exactly at breakpoints);
    the second weight is then ``1 - mu`` computed exactly.
    """

    rules: tuple[str, ...]
    weights: tuple[Number, ...]
    mu: Number | None = None

    def __post_init__(self) -> None:
        if not self.rules or len(self.rules) != len(self.weights):
            raise ValueError("need one weight per rule")
        if any(float(w) < -1e-12 for w in self.weights) or abs(sum(float(w) for w in self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must lie on the probability simplex")

    @classmethod
    def pair(cls, rule1: str, rule2: str, mu: Number) -> "ScoringSpec":
        if not 0 <= mu <= 1:
            raise ValueError("mu must lie in [0, 1]")
        return cls((rule1, rule2), (mu, 1 - mu), mu)

    @classmethod
    def single(cls, rule: str) -> "ScoringSpec":
        return cls((rule,), (1.0,))

    @property
    def d(self) -> int:
        return len(self.rules)

    def float_weights(self) -> np.ndarray:
        if self.mu is not None:
            m = float(self.mu)
            return np.array([m, 1.0 - m])
        return np.array([float(w) for w in self.weights])

    def exact_weights(self) -> tuple[Fraction, ...]:
        if self.mu is not None:
            m = Fraction(self.mu)
            return (m, 1 - m)
        return tuple(Fraction(w) for w in self.weights)


def base_scores(rules: Sequence[str], ctx: ScoreContext) -> np.ndarray:
    """Matrix of base-rule scores, one row per candidate, one column per rule."""
    fns = [get_rule(r) for r in rules]
    out = np.empty((len(ctx.candidates), len(fns)))
    for row, i in enumerate(ctx.candidates):
        for col, fn in enumerate(fns):
            out[row, col] = fn(ctx, i)
    return out


def combined_score(spec: ScoringSpec, ctx: ScoreContext, i: int) -> float:
    return float(sum(float(w) * get_rule(r)(ctx, i) for r, w in zip(spec.rules, spec.float_weights())))


def argmax_row(
    scores: np.ndarray,
    weights: np.ndarray,
    exact_weights: Sequence[Fraction],
    slope: Sequence[Fraction] | None = None,
) -> int:
    """Row maximizing ``scores @ weights``; exact ties go to the lowest row.

    ``slope`` breaks exact ties by the derivative of the combined score, which
    evaluates the choice an infinitesimal step past the given weights.
    """
    vals = scores @ weights
    top = float(vals.max())
    scale = 1.0 + float(np.abs(scores).max())
    near = np.flatnonzero(vals >= top - _NEAR_TIE * scale)
    if near.size == 1:
        return int(near[0])
    best_row, best_key = -1, None
    for r in near:
        row = [Fraction(float(s)) for s in scores[r]]
        key: tuple = (sum(w * s for w, s in zip(exact_weights, row)),)
        if slope is not None:
            key += (sum(w * s for w, s in zip(slope, row)),)
        if best_key is None or key > best_key:
            best_row, best_key = int(r), key
    return best_row


def select_variable(spec: ScoringSpec, ctx: ScoreContext) -> int:
    """Candidate with the highest combined score, lowest index on ties."""
    if not ctx.candidates:
        raise ValueError("select_variable needs a nonempty candidate set")
    scores = base_scores(spec.rules, ctx)
    return ctx.candidates[argmax_row(scores, spec.float_weights(), spec.exact_weights())]


__all__ = [
    "ScoreContext", "ScoringSpec", "RULES", "get_rule", "base_scores", "combined_score",
    "select_variable", "argmax_row", "binary_entropy", "score_most_fractional", "score_linear",
    "score_product", "score_entropic", "score_min_change", "score_max_change", "PRODUCT_GAMMA",
]
