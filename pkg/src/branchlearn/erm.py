"""Exact sweeps over the mixing weight of two scoring rules, and ERM on top of them.

For two base rules the combined score of each candidate is affine in ``mu``.
While a run makes its choices, a ledger intersects the set of ``mu`` values
for which every choice would have been the same. That set is an interval;
stepping from one interval to the next covers ``[0, 1]`` with finitely many
runs. Breakpoints are exact rationals computed from the float scores, and a
run placed just right of a closed endpoint evaluates ties by the derivative
in ``mu``, so no interval can be stepped over.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from . import bnb
from .scoring import ScoringSpec, argmax_row

MAX_INTERVALS = 100_000
_ONE = Fraction(1)
_ZERO = Fraction(0)


@dataclass(frozen=True)
class Interval:
    """Subinterval of ``[0, 1]`` with explicit endpoint closure; may be a single point."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = False

    def contains(self, mu: float | Fraction) -> bool:
        mu = Fraction(mu)
        above = mu > self.lo or (self.lo_closed and mu == self.lo)
        below = mu < self.hi or (self.hi_closed and mu == self.hi)
        return above and below

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{float(self.lo)!r}, {float(self.hi)!r}{']' if self.hi_closed else ')'}"


class IntervalLedger:
    """Chooser that also shrinks the interval of ``mu`` values agreeing with every choice.

    ``side=+1`` evaluates an infinitesimal step to the right of ``mu``.
    """

    def __init__(self, mu: float | Fraction, side: int = 0):
        self.mu = Fraction(mu)
        self.side = side
        self.lo, self.lo_closed = _ZERO, True
        self.hi, self.hi_closed = _ONE, True
        self._w = np.array([float(self.mu), 1.0 - float(self.mu)])
        self._wx = (self.mu, 1 - self.mu)
        self._slope = (_ONE, -_ONE) if side > 0 else None

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi, self.lo_closed, self.hi_closed)

    def __call__(self, node: Any, candidates: Sequence[int], scores: np.ndarray) -> int:
        r = argmax_row(scores, self._w, self._wx, self._slope)
        s1 = [Fraction(float(v)) for v in scores[:, 0]]
        s2 = [Fraction(float(v)) for v in scores[:, 1]]
        for o in range(len(candidates)):
            if o == r:
                continue
            # f_r(t) - f_o(t) = a t + b must stay positive; zero is allowed only if r wins the index tie
            b = s2[r] - s2[o]
            a = (s1[r] - s1[o]) - b
            if a == 0:
                continue
            root = -b / a
            closed = candidates[r] < candidates[o]
            if a > 0:
                self._raise_lo(root, closed)
            else:
                self._lower_hi(root, closed)
        return r

    def _raise_lo(self, value: Fraction, closed: bool) -> None:
        if value > self.lo:
            self.lo, self.lo_closed = value, closed
        elif value == self.lo:
            self.lo_closed = self.lo_closed and closed

    def _lower_hi(self, value: Fraction, closed: bool) -> None:
        if value < self.hi:
            self.hi, self.hi_closed = value, closed
        elif value == self.hi:
            self.hi_closed = self.hi_closed and closed


# -- engine dispatch -------------------------------------------------------------

def _is_csp(instance: Any) -> bool:
    return hasattr(instance, "domains")


def _default_cfg(instance: Any):
    if _is_csp(instance):
        from .csp import CspConfig
        return CspConfig()
    return bnb.BnbConfig()


def _run_engine(instance: Any, spec: ScoringSpec, cfg: Any, chooser: Callable | None = None):
    """Run the tree search matching ``instance``; returns the search tree."""
    if _is_csp(instance):
        from .csp import ts_run
        return ts_run(instance, spec=spec, cfg=cfg, chooser=chooser).tree
    return bnb.run(instance, spec, cfg, chooser).tree


def run_with_ledger(instance: Any, rule1: str, rule2: str, mu: float | Fraction, cfg: Any = None,
                    side: int = 0) -> tuple[bnb.SearchTree, Interval]:
    """One run at ``mu`` plus the interval of weights producing the same tree."""
    cfg = cfg if cfg is not None else _default_cfg(instance)
    ledger = IntervalLedger(mu, side)
    spec = ScoringSpec.pair(rule1, rule2, Fraction(mu))
    tree = _run_engine(instance, spec, cfg, ledger)
    iv = ledger.interval
    if not (iv.contains(mu) or (side > 0 and iv.lo == Fraction(mu) and iv.hi > iv.lo)):
        raise RuntimeError(f"ledger interval {iv} does not contain mu={float(mu)!r}")
    return tree, iv


# -- piecewise-constant costs -------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    interval: Interval
    cost: float
    fingerprint: str | None = None


class PiecewiseCost:
    """Cost over ``[0, 1]`` as consecutive pieces that partition the unit interval."""

    def __init__(self, pieces: Sequence[Piece]):
        self.pieces = list(pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def breakpoints(self) -> list[Fraction]:
        return [p.interval.lo for p in self.pieces] + [self.pieces[-1].interval.hi]

    @property
    def costs(self) -> list[float]:
        return [p.cost for p in self.pieces]

    @property
    def fingerprints(self) -> list[str | None]:
        return [p.fingerprint for p in self.pieces]

    def piece_at(self, mu: float | Fraction) -> Piece:
        mu = Fraction(mu)
        for p in self.pieces:
            if p.interval.contains(mu):
                return p
        raise ValueError(f"mu={float(mu)!r} not covered")

    def __call__(self, mu: float | Fraction) -> float:
        return self.piece_at(mu).cost

    def argmin(self) -> Piece:
        """Cheapest piece; ties prefer intervals of positive length, then the leftmost."""
        return min(self.pieces, key=lambda p: (p.cost, p.interval.length == 0))

    def check_partition(self) -> None:
        prev = None
        for p in self.pieces:
            iv = p.interval
            if prev is None:
                ok = iv.lo == 0 and iv.lo_closed
            else:
                ok = iv.lo == prev.hi and iv.lo_closed != prev.hi_closed
            if not ok or iv.lo > iv.hi:
                raise AssertionError(f"pieces do not partition [0, 1] near {iv}")
            prev = iv
        if prev is None or prev.hi != 1 or not prev.hi_closed:
            raise AssertionError("pieces do not reach 1")

    def merged(self) -> "PiecewiseCost":
        """Fuse neighbours with equal cost and fingerprint."""
        out: list[Piece] = []
        for p in self.pieces:
            if out and out[-1].cost == p.cost and out[-1].fingerprint == p.fingerprint:
                last = out[-1].interval
                out[-1] = Piece(Interval(last.lo, p.interval.hi, last.lo_closed, p.interval.hi_closed),
                                p.cost, p.fingerprint)
            else:
                out.append(p)
        return PiecewiseCost(out)


def enumerate_behaviors(instance: Any, rule1: str, rule2: str, cfg: Any = None,
                        max_intervals: int = MAX_INTERVALS) -> PiecewiseCost:
    """All distinct trees over ``mu`` in ``[0, 1]`` with their capped tree sizes."""
    cfg = cfg if cfg is not None else _default_cfg(instance)
    kappa = cfg.kappa
    pieces: list[Piece] = []
    mu, side = _ZERO, 0
    while True:
        tree, iv = run_with_ledger(instance, rule1, rule2, mu, cfg, side)
        pieces.append(Piece(iv, float(min(tree.size, kappa)), tree.fingerprint))
        if len(pieces) > max_intervals:
            raise RuntimeError(f"more than {max_intervals} intervals; runaway splitting near mu={float(mu)!r}")
        if iv.hi == 1 and iv.hi_closed:
            break
        mu, side = iv.hi, (1 if iv.hi_closed else 0)
    pc = PiecewiseCost(pieces).merged()
    pc.check_partition()
    return pc


def average(costs: Sequence[PiecewiseCost]) -> PiecewiseCost:
    """Pointwise mean of piecewise-constant costs on the merged breakpoints."""
    if not costs:
        raise ValueError("need at least one cost function")
    points = sorted({b for pc in costs for b in pc.breakpoints})
    parts: list[Interval] = []
    for k, b in enumerate(points):
        parts.append(Interval(b, b, True, True))
        if k + 1 < len(points):
            parts.append(Interval(b, points[k + 1], False, False))
    pieces = []
    for iv in parts:
        probe = iv.lo if iv.length == 0 else iv.midpoint
        mean = sum(pc(probe) for pc in costs) / len(costs)
        pieces.append(Piece(iv, mean))
    return PiecewiseCost(pieces).merged()


def cost_vectors(costs: Sequence[PiecewiseCost]) -> list[tuple[float, ...]]:
    """Distinct vectors ``(cost_1(mu), ..., cost_m(mu))`` as ``mu`` ranges over ``[0, 1]``."""
    points = sorted({b for pc in costs for b in pc.breakpoints})
    probes = list(points) + [(a + b) / 2 for a, b in zip(points, points[1:])]
    return sorted({tuple(pc(t) for pc in costs) for t in probes})


class ErmResult(NamedTuple):
    mu_hat: float
    avg_cost: PiecewiseCost


def erm_minimize(sample: Sequence[Any], rule1: str, rule2: str, cfg: Any = None) -> ErmResult:
    """Minimize the sample-average tree size over ``mu``; returns the midpoint of the best piece."""
    if not sample:
        raise ValueError("sample must be nonempty")
    avg = average([enumerate_behaviors(q, rule1, rule2, cfg) for q in sample])
    best = avg.argmin()
    return ErmResult(float(best.interval.midpoint), avg)


class GridPoint(NamedTuple):
    weights: tuple[float, ...]
    cost: float
    fingerprint: str


def grid_sweep(instance: Any, rules: Sequence[str], grid: Sequence[float | Sequence[float]],
               cfg: Any = None) -> list[GridPoint]:
    """Independent run per grid point; a scalar grid entry is the weight of the first of two rules."""
    if not grid:
        raise ValueError("grid must be nonempty")
    cfg = cfg if cfg is not None else _default_cfg(instance)
    out = []
    for g in grid:
        if np.ndim(g) == 0:
            spec = ScoringSpec.pair(rules[0], rules[1], float(g))
        else:
            spec = ScoringSpec(tuple(rules), tuple(float(w) for w in g))
        tree = _run_engine(instance, spec, cfg)
        out.append(GridPoint(tuple(float(w) for w in spec.weights), float(min(tree.size, cfg.kappa)),
                             tree.fingerprint))
    return out


def simplex_grid(d: int, step: float) -> list[tuple[float, ...]]:
    """Weight vectors on the ``d``-simplex whose coordinates are multiples of ``step``."""
    k = round(1 / step)
    if abs(k * step - 1) > 1e-9:
        raise ValueError("1/step must be an integer")
    out = []
    # stars and bars: bar positions split k units among d coordinates
    for bars in combinations(range(k + d - 1), d - 1):
        parts, prev = [], -1
        for b in bars + (k + d - 1,):
            parts.append(b - prev - 1)
            prev = b
        out.append(tuple(p / k for p in parts))
    return out


INTERVAL_CSV_HEADER = ("instance_id", "lo", "hi", "cost", "fingerprint", "lo_closed", "hi_closed")


def intervals_csv(rows: Sequence[tuple[str, PiecewiseCost]]) -> str:
    """One CSV row per piece of each instance's cost function."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INTERVAL_CSV_HEADER)
    for inst_id, pc in rows:
        for p in pc.pieces:
            iv = p.interval
            w.writerow([inst_id, repr(float(iv.lo)), repr(float(iv.hi)), repr(p.cost), p.fingerprint or "",
                        int(iv.lo_closed), int(iv.hi_closed)])
    return buf.getvalue()


def read_intervals_csv(text: str) -> dict[str, PiecewiseCost]:
    """Inverse of ``intervals_csv`` (endpoints come back as the floats written)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != INTERVAL_CSV_HEADER:
        raise ValueError("not an intervals CSV (header mismatch)")
    out: dict[str, list[Piece]] = {}
    for r in rows[1:]:
        iv = Interval(Fraction(float(r[1])), Fraction(float(r[2])), r[5] == "1", r[6] == "1")
        out.setdefault(r[0], []).append(Piece(iv, float(r[3]), r[4] or None))
    return {k: PiecewiseCost(v) for k, v in out.items()}


__all__ = [
    "Interval", "IntervalLedger", "Piece", "PiecewiseCost", "ErmResult", "GridPoint",
    "run_with_ledger", "enumerate_behaviors", "average", "cost_vectors", "erm_minimize", "grid_sweep",
    "simplex_grid", "intervals_csv", "read_intervals_csv", "MAX_INTERVALS",
]
