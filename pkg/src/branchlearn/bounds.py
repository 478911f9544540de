"""Sample-complexity and generalization formulas, evaluated numerically.

All logarithms are natural. Formulas that hold up to a universal constant are
evaluated with constant 1; ``EXACT`` marks the ones whose constants are explicit.
"""

from __future__ import annotations

import math
import warnings
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np

EXACT = {
    "pdim_pathwise": False,
    "pdim_general": False,
    "gen_bound_pdim": False,
    "rad_worstcase": True,
    "rad_datadep": True,
    "massart_bound": True,
    "gen_bound_rad": True,
}


def pdim_pathwise(n: int) -> int:
    """Smallest ``m`` with ``2^m > m * 2^(n(n-1)/2) * n^n + 1`` (exact integer scan)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    intervals = 2 ** (n * (n - 1) // 2) * n**n
    m = 1
    while 2**m <= m * intervals + 1:
        m += 1
    return m


def pdim_general(n: int, d: int, kappa_bar: int, c_region: float = 1.0) -> int:
    """Smallest ``m`` with ``2^m > c_region * d * m^d * n^(2 d (kappa_bar + 1))``, in log space."""
    if min(n, d, kappa_bar) < 1 or c_region <= 0:
        raise ValueError("n, d, kappa_bar must be >= 1 and c_region > 0")
    rhs_const = math.log(c_region) + math.log(d) + 2 * d * (kappa_bar + 1) * math.log(n)

    def ok(m: int) -> bool:
        return m * math.log(2) > rhs_const + d * math.log(m)

    if ok(1):
        return 1
    # m ln2 - d ln m decreases up to d/ln2 and increases after, so search past the dip
    lo = max(1, math.ceil(d / math.log(2)))
    hi = lo
    while not ok(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi if not ok(lo) else lo


def gen_bound_pdim(pdim: float, m: int, kappa: float, delta: float) -> float:
    """``kappa sqrt(pdim/m) + kappa sqrt(ln(1/delta)/m)`` (up to a constant)."""
    _check_m(m)
    return kappa * math.sqrt(pdim / m) + kappa * math.sqrt(math.log(1 / delta) / m)


def gen_bound_general(n: int, d: int, kappa_bar: int, m: int, kappa: float, delta: float) -> float:
    """Pseudo-dimension bound for arbitrary rule combinations (up to a constant)."""
    return gen_bound_pdim(pdim_general(n, d, kappa_bar), m, kappa, delta)


def rad_worstcase(n: int, m: int, kappa: float) -> float:
    """``kappa sqrt((n^2 + 2 n ln n + 2 ln m) / m)``."""
    _check_m(m)
    if n < 1:
        raise ValueError("n must be >= 1")
    return kappa * math.sqrt((n * n + 2 * n * math.log(n) + 2 * math.log(m)) / m)


def massart_bound(N: int, m: int, c: float) -> float:
    """``c sqrt(2 ln N / m)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_m(m)
    return c * math.sqrt(2 * math.log(N) / m)


def gen_bound_rad(erad: float, m: int, kappa: float, delta: float) -> float:
    """``2 erad + 4 kappa sqrt((2/m) ln(4/delta))``."""
    _check_m(m)
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 2 * erad + 4 * kappa * math.sqrt((2 / m) * math.log(4 / delta))


def _check_m(m: int) -> None:
    if m < 1:
        raise ValueError("sample size m must be >= 1")


def _objective(t: float, norms: np.ndarray, m: int) -> float:
    """``(1/lam) log sum exp(0.5 (lam ||a|| / m)^2)`` at ``lam = e^t``."""
    lam = math.exp(t)
    e = 0.5 * (lam * norms / m) ** 2
    top = float(e.max())
    return (top + math.log(float(np.exp(e - top).sum()))) / lam


def rad_datadep(cost_vectors: Iterable[Sequence[float]], m: int, tol: float = 1e-6) -> float:
    """Infimum over ``lam > 0`` of ``(1/lam) log sum_a exp(0.5 (lam ||a||_2 / m)^2)``.

    Duplicate vectors are dropped first. Minimization runs on ``t = log lam``:
    a coarse grid locates the basin, golden-section search refines it. A minimum
    on the edge of the search range raises a ``RuntimeWarning``.
    """
    _check_m(m)
    vecs = {tuple(float(v) for v in a) for a in cost_vectors}
    if not vecs:
        raise ValueError("need at least one cost vector")
    norms = np.array([math.sqrt(sum(v * v for v in a)) for a in vecs])
    n_vec = len(vecs)
    r_max = float(norms.max())
    if r_max == 0.0 or n_vec == 1:
        # the log-sum term is 0 (N = 1) or constant ln N (all zero): the infimum is the limit
        return 0.0

    center = math.log(m * math.sqrt(2 * math.log(n_vec)) / r_max)
    lo, hi = center - 30.0, center + 30.0
    grid = np.linspace(lo, hi, 241)
    vals = [_objective(t, norms, m) for t in grid]
    k = int(np.argmin(vals))
    if k in (0, len(grid) - 1):
        warnings.warn("rad_datadep: minimum at the edge of the search range", RuntimeWarning)
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = _objective(c, norms, m), _objective(d, norms, m)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _objective(c, norms, m)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _objective(d, norms, m)
    return min(fc, fd, vals[k])


class CurvePoint(NamedTuple):
    m: int
    n_vectors: int
    erad: float
    worst_case: float
    data_dependent: float


def generalization_curves(costs: Sequence[Any], n: int, kappa: float, delta: float,
                          ms: Sequence[int] | None = None) -> list[CurvePoint]:
    """Worst-case and data-dependent generalization values for prefixes of a sample.

    ``costs`` are per-instance piecewise-constant tree-size functions; each is
    capped at ``kappa``. For each prefix size ``m`` the achievable cost vectors
    are read off the merged breakpoints of the first ``m`` functions.
    """
    from .erm import cost_vectors

    ms = list(ms) if ms is not None else list(range(1, len(costs) + 1))
    out = []
    for m in ms:
        vecs = [tuple(min(v, kappa) for v in vec) for vec in cost_vectors(costs[:m])]
        erad = rad_datadep(vecs, m)
        out.append(CurvePoint(m, len(set(vecs)), erad,
                              gen_bound_rad(rad_worstcase(n, m, kappa), m, kappa, delta),
                              gen_bound_rad(erad, m, kappa, delta)))
    return out


__all__ = [
    "EXACT", "pdim_pathwise", "pdim_general", "gen_bound_pdim", "gen_bound_general", "rad_worstcase",
    "massart_bound", "gen_bound_rad", "rad_datadep", "generalization_curves", "CurvePoint",
]
