"""Dense bounded-variable primal simplex for box-bounded LP relaxations.

Every LP here maximizes ``c @ x`` over rows ``a @ x (<=|=|>=) b`` with
``lo <= x <= hi`` and the box inside ``[0, 1]``. The solver keeps a full
tableau, uses Phase-I artificials for rows the starting point cannot satisfy,
and picks entering and leaving variables with Bland's lowest-index rule, so
the optimum it returns is a deterministic function of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

FEAS_TOL = 1e-7
CMP_TOL = 1e-6
_PIVOT_TOL = 1e-9
_TIE_TOL = 1e-12

SENSES = ("le", "eq", "ge")


class StructuralError(ValueError):
    """Malformed LP, or a numerical state that box bounds make impossible."""


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Maximize ``objective @ x`` subject to ``A x (senses) rhs`` and ``lo <= x <= hi``."""

    objective: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2 or A.shape[1] != n:
            raise StructuralError(f"constraint matrix shape {A.shape} does not match {n} variables")
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        senses = tuple(self.senses)
        if rhs.size != A.shape[0] or len(senses) != A.shape[0]:
            raise StructuralError("rows, senses and rhs must have equal length")
        bad = [s for s in senses if s not in SENSES]
        if bad:
            raise StructuralError(f"unknown row sense {bad[0]!r}")
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.size != n or hi.size != n:
            raise StructuralError("bounds must have one entry per variable")
        if np.any(lo > hi) or np.any(lo < 0.0) or np.any(hi > 1.0):
            raise StructuralError("bounds must satisfy 0 <= lo <= hi <= 1")
        for name, val in (("objective", c), ("A", A), ("rhs", rhs), ("lo", lo), ("hi", hi)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "senses", senses)

    def with_bounds(self, lo: np.ndarray, hi: np.ndarray) -> "LinearProgram":
        return LinearProgram(self.objective, self.A, self.senses, self.rhs, lo, hi)

    @classmethod
    def from_rows(
        cls,
        objective: Sequence[float],
        rows: Sequence[tuple[Sequence[float], str, float]],
        bounds: Sequence[tuple[float, float]] | None = None,
    ) -> "LinearProgram":
        n = len(objective)
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), n)
        if bounds is None:
            lo, hi = np.zeros(n), np.ones(n)
        else:
            lo = np.array([b[0] for b in bounds], dtype=float)
            hi = np.array([b[1] for b in bounds], dtype=float)
        return cls(np.asarray(objective, dtype=float), A, tuple(r[1] for r in rows),
                   np.array([r[2] for r in rows], dtype=float), lo, hi)

    @classmethod
    def trusted(cls, objective, A, senses, rhs, lo, hi) -> "LinearProgram":
        """Build without validation from arrays that are already well-formed."""
        lp = object.__new__(cls)
        for name, val in (("objective", objective), ("A", A), ("senses", senses), ("rhs", rhs),
                          ("lo", lo), ("hi", hi)):
            object.__setattr__(lp, name, val)
        return lp

    def slack_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounds of the row slacks ``s = rhs - A x`` implied by the senses."""
        return _slack_bounds(self.senses)

    @property
    def n(self) -> int:
        return self.objective.size

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def max_violation(self, x: np.ndarray) -> float:
        """Largest row or bound violation of ``x``."""
        viol = 0.0
        if self.m:
            act = self.A @ x - self.rhs
            s = np.array(self.senses)
            viol = max(
                float(np.max(np.where(s == "le", act, 0.0), initial=0.0)),
                float(np.max(np.where(s == "ge", -act, 0.0), initial=0.0)),
                float(np.max(np.where(s == "eq", np.abs(act), 0.0), initial=0.0)),
            )
        return max(viol, float(np.max(self.lo - x, initial=0.0)), float(np.max(x - self.hi, initial=0.0)))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective: float
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def is_infeasible(self) -> bool:
        return self.status is LpStatus.INFEASIBLE


class PartialSolve(NamedTuple):
    solution: LpSolution
    proven: bool


@lru_cache(maxsize=256)
def _slack_bounds(senses: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([-math.inf if s == "ge" else 0.0 for s in senses])
    hi = np.array([math.inf if s == "le" else 0.0 for s in senses])
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


class _Tableau:
    """Bounded-variable simplex state over columns ``[x | slacks | artificials]``."""

    def __init__(self, lp: LinearProgram, start: np.ndarray):
        m, n = lp.m, lp.n
        s_lo, s_hi = lp.slack_bounds()
        x0 = np.minimum(np.maximum(start, lp.lo), lp.hi)
        resid = lp.rhs - lp.A @ x0
        s0 = np.minimum(np.maximum(resid, s_lo), s_hi)
        gap = resid - s0
        art_rows = np.nonzero(np.abs(gap) > _TIE_TOL)[0]
        k = art_rows.size
        sign = np.ones(m)
        sign[art_rows] = np.sign(gap[art_rows])

        M0 = np.zeros((m, n + m + k))
        M0[:, :n] = lp.A
        M0[np.arange(m), n + np.arange(m)] = 1.0
        M0[art_rows, n + m + np.arange(k)] = sign[art_rows]
        self.M0 = M0
        self.T = sign[:, None] * M0
        self.n, self.m, self.k = n, m, k
        self.lb = np.concatenate([lp.lo, s_lo, np.zeros(k)])
        self.ub = np.concatenate([lp.hi, s_hi, np.full(k, math.inf)])
        # slack rows the start already satisfies hold the residual exactly
        s_val = np.where(np.abs(gap) > _TIE_TOL, s0, resid)
        self.val = np.concatenate([x0, s_val, np.abs(gap[art_rows])])
        self.basis = np.arange(n, n + m)
        self.basis[art_rows] = n + m + np.arange(k)
        self.rhs = lp.rhs
        self.pivots = 0

    def optimize(self, cost: np.ndarray, budget: float) -> bool:
        """Run simplex iterations on ``cost``; True when optimality is proven."""
        tol = 1e-9 * (1.0 + float(np.max(np.abs(cost), initial=0.0)))
        T, val, lb, ub, basis = self.T, self.val, self.lb, self.ub, self.basis
        can_up = ub - FEAS_TOL
        can_down = lb + FEAS_TOL
        hard_cap = 50 * (T.shape[0] + T.shape[1]) + 1000
        steps = 0
        while True:
            d = cost - cost[basis] @ T
            up = (d > tol) & (val < can_up)
            eligible = up | ((d < -tol) & (val > can_down))
            eligible[basis] = False
            j = int(eligible.argmax())
            if not eligible[j]:
                return True
            if self.pivots >= budget:
                return False
            steps += 1
            if steps > hard_cap:
                raise RuntimeError("simplex iteration cap exceeded; numerical cycling suspected")

            direction = 1.0 if up[j] else -1.0
            col = T[:, j] if direction > 0 else -T[:, j]
            xb = val[basis]
            own = (ub[j] - val[j]) if direction > 0 else (val[j] - lb[j])

            # ratio test in plain Python: rows are few and numpy call overhead dominates
            limits = []
            for r, (a, x, lo_r, hi_r) in enumerate(zip(col.tolist(), xb.tolist(),
                                                        lb[basis].tolist(), ub[basis].tolist())):
                if a > _PIVOT_TOL:
                    limits.append((max((x - lo_r) / a, 0.0), r))
                elif a < -_PIVOT_TOL:
                    limits.append((max((x - hi_r) / a, 0.0), r))
            step = min(own, min(limits)[0]) if limits else own
            if step == math.inf:
                raise StructuralError("unbounded ray detected in a box-bounded LP")

            # Bland: among blocking candidates the lowest variable index leaves
            leave_row = -1
            leave_var = j if own <= step + _TIE_TOL else math.inf
            for lim, r in limits:
                if lim <= step + _TIE_TOL and basis[r] < leave_var:
                    leave_var, leave_row = int(basis[r]), r

            val[j] += direction * step
            val[basis] = xb - step * col
            self.pivots += 1
            if leave_row < 0:
                val[j] = ub[j] if direction > 0 else lb[j]
                continue
            out = int(basis[leave_row])
            val[out] = lb[out] if col[leave_row] > 0 else ub[out]
            piv = T[leave_row] / T[leave_row, j]
            T -= np.outer(T[:, j], piv)
            T[leave_row] = piv
            basis[leave_row] = j

    def refresh_basics(self) -> None:
        """Recompute basic values from the nonbasic ones to shed drift."""
        binv = self.T[:, self.n:self.n + self.m]
        nb = np.ones(self.val.size, dtype=bool)
        nb[self.basis] = False
        self.val[self.basis] = binv @ (self.rhs - self.M0[:, nb] @ self.val[nb])


def _run(lp: LinearProgram, start: np.ndarray, budget: float) -> PartialSolve:
    tab = _Tableau(lp, start)
    n, m, k = tab.n, tab.m, tab.k

    if k:
        phase1 = np.zeros(n + m + k)
        phase1[n + m:] = -1.0
        proven = tab.optimize(phase1, budget)
        tab.refresh_basics()
        infeas = float(tab.val[n + m:].sum())
        if not proven:
            x = np.clip(tab.val[:n], lp.lo, lp.hi)
            sol = LpSolution(LpStatus.ITERATION_LIMIT, x, float(lp.objective @ x), tab.pivots)
            return PartialSolve(sol, False)
        if infeas > FEAS_TOL * (1.0 + float(np.max(np.abs(lp.rhs), initial=0.0))):
            return PartialSolve(LpSolution(LpStatus.INFEASIBLE, None, -math.inf, tab.pivots), True)
        tab.ub[n + m:] = 0.0
        tab.val[n + m:] = np.minimum(tab.val[n + m:], 0.0)

    phase2 = np.concatenate([lp.objective, np.zeros(m + k)])
    proven = tab.optimize(phase2, budget)
    tab.refresh_basics()
    x = np.clip(tab.val[:n], lp.lo, lp.hi)
    # snap values that drifted a hair away from a bound
    for bound in (lp.lo, lp.hi):
        near = np.abs(x - bound) < 1e-12
        x[near] = bound[near]
    status = LpStatus.OPTIMAL if proven else LpStatus.ITERATION_LIMIT
    return PartialSolve(LpSolution(status, x, float(lp.objective @ x), tab.pivots), proven)


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` to optimality from the all-lower-bounds start.

    Returns:
        An ``LpSolution`` with status ``OPTIMAL`` or ``INFEASIBLE``.
    """
    return _run(lp, lp.lo, math.inf).solution


def partial_solve(lp: LinearProgram, warm_start: np.ndarray, max_pivots: float) -> PartialSolve:
    """Run at most ``max_pivots`` simplex iterations starting from ``warm_start``.

    The start is clipped into ``lp``'s bounds (a child LP fixes one more
    variable than the parent whose optimum is typically passed in). Rows the
    clipped start violates get Phase-I artificials, and those pivots count
    against the budget. When the budget runs out the objective at the current
    point is reported with ``proven=False``.
    """
    if max_pivots < 0:
        raise ValueError("max_pivots must be >= 0")
    start = np.asarray(warm_start, dtype=float)
    if start.shape != (lp.n,):
        raise StructuralError("warm start has the wrong dimension")
    return _run(lp, start, max_pivots)
