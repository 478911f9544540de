"""Instance constructors: adversarial families, the knapsack example, and random domains.

Random generators take a seed and draw from ``numpy.random.default_rng``, so the
same seed always yields the same instance (and the same file bytes).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .milp import MilpInstance

SEP_MARGIN = 1e-2  # keeps margin / M far above the integrality tolerance at w = 0


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the adversarial families: even ``n >= 6``, ``mustar``, scale ``gamma >= 1``."""

    n: int
    mustar: float
    gamma: float = 1.0

    def check(self, mu_lo: float, mu_hi: float) -> None:
        if self.n < 6 or self.n % 2:
            raise ValueError("n must be an even integer >= 6")
        if not mu_lo < self.mustar < mu_hi:
            raise ValueError(f"mustar must lie in ({mu_lo:.4g}, {mu_hi:.4g})")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")


def _parity_rows(n: int) -> list[tuple[list[float], str, float]]:
    big = [2.0] * (n - 3) + [0.0] * 3
    small = [0.0] * (n - 3) + [2.0] * 3
    return [(big, "eq", float(n - 3)), (small, "eq", 3.0)]


def jeroslow(n_odd: int, c: Sequence[float] | None = None) -> MilpInstance:
    """``2 * sum(x) = n_odd`` over binaries: infeasible by parity."""
    if n_odd < 1 or n_odd % 2 == 0:
        raise ValueError("n_odd must be a positive odd integer")
    c = [0.0] * n_odd if c is None else list(c)
    if len(c) != n_odd:
        raise ValueError("objective length must equal n_odd")
    return MilpInstance.from_rows(c, [([2.0] * n_odd, "eq", float(n_odd))],
                                  header=[f"jeroslow n={n_odd}"])


def family_F(p: FamilyParams) -> MilpInstance:
    """Large parity block with increasing costs glued to a 3-variable parity block.

    Objective ``gamma * (1, ..., n-3, 0, 1.5, 3 - 1/(2 mustar))``; for mixing
    weights below ``mustar`` the combined rule goes after the small block first.
    """
    p.check(1 / 3, 1 / 2)
    n, g = p.n, p.gamma
    c = [g * k for k in range(1, n - 2)] + [0.0, g * 1.5, g * (3 - 1 / (2 * p.mustar))]
    return MilpInstance.from_rows(c, _parity_rows(n),
                                  header=[f"familyF n={n} mustar={p.mustar!r} gamma={g!r}"])


def family_G(p: FamilyParams) -> MilpInstance:
    """Mirror of ``family_F``: cheap small block ``gamma * (1, 2, 3)``, lopsided large block."""
    p.check(1 / 3, 2 / 3)
    n, g = p.n, p.gamma
    big = 3 - 1 / (2 * p.mustar)
    c1 = []
    for i in range(1, n - 2):
        if 2 * i < n - 2:
            c1.append(0.0)
        elif 2 * i == n - 2:
            c1.append(g * 1.5)
        else:
            c1.append(g * big)
    c = c1 + [g * 1.0, g * 2.0, g * 3.0]
    return MilpInstance.from_rows(c, _parity_rows(n),
                                  header=[f"familyG n={n} mustar={p.mustar!r} gamma={g!r}"])


@dataclass(frozen=True)
class WorstCaseMixture:
    """Uniform distribution over ``{Q_a, Q_b}`` with ``Q_a`` from G and ``Q_b`` from F."""

    q_a: MilpInstance
    q_b: MilpInstance

    @property
    def support(self) -> tuple[MilpInstance, MilpInstance]:
        return (self.q_a, self.q_b)

    def sample(self, m: int, seed: int | None = None) -> list[MilpInstance]:
        coins = np.random.default_rng(seed).integers(0, 2, size=m)
        return [self.q_a if k == 0 else self.q_b for k in coins]


def worst_case_mixture(n: int, a: float, b: float, gamma_a: float = 1.0,
                       gamma_b: float = 1.0) -> WorstCaseMixture:
    if not 1 / 3 < a < b < 1 / 2:
        raise ValueError("need 1/3 < a < b < 1/2")
    return WorstCaseMixture(family_G(FamilyParams(n, a, gamma_a)), family_F(FamilyParams(n, b, gamma_b)))


def knapsack_example() -> MilpInstance:
    return MilpInstance.from_rows(
        [40, 60, 10, 10, 3, 20, 60],
        [([40, 50, 30, 10, 10, 40, 30], "le", 100)],
        header=["knapsack example"],
    )


# -- random domains -----------------------------------------------------------

def winner_determination_milp(bids: Sequence[tuple[int, Sequence[int], float]], n_goods: int,
                              header: Sequence[str] = ()) -> MilpInstance:
    """Set packing over bids ``(bidder, bundle, value)``: each good and each bidder at most once."""
    n = len(bids)
    bidders = sorted({b[0] for b in bids})
    rows = []
    for good in range(n_goods):
        rows.append(([1.0 if good in b[1] else 0.0 for b in bids], "le", 1.0))
    for bidder in bidders:
        rows.append(([1.0 if b[0] == bidder else 0.0 for b in bids], "le", 1.0))
    return MilpInstance.from_rows([float(b[2]) for b in bids], rows, range(n), header)


def gen_winner_determination(n_bidders: int, n_goods: int, max_bundle: int, seed: int,
                             max_bids: int = 3) -> MilpInstance:
    """Each bidder places 1..max_bids bids on random bundles valued ``U[0,1] * |bundle|``."""
    if min(n_bidders, n_goods, max_bundle, max_bids) < 1:
        raise ValueError("sizes must be >= 1")
    rng = np.random.default_rng(seed)
    bids = []
    for bidder in range(n_bidders):
        for _ in range(int(rng.integers(1, max_bids + 1))):
            size = int(rng.integers(1, min(max_bundle, n_goods) + 1))
            bundle = tuple(sorted(int(g) for g in rng.choice(n_goods, size=size, replace=False)))
            bids.append((bidder, bundle, float(rng.random()) * size))
    head = [f"wdp n_bidders={n_bidders} n_goods={n_goods} max_bundle={max_bundle} seed={seed}"]
    head += [f"bid {k} bidder={b[0]} bundle={','.join(map(str, b[1]))}" for k, b in enumerate(bids)]
    return winner_determination_milp(bids, n_goods, head)


def facility_location_milp(f: np.ndarray, d: np.ndarray, header: Sequence[str] = ()) -> MilpInstance:
    """Open facilities ``x_j`` (binary) and assign customers ``y_ij`` (continuous).

    Variables are ``x_0..x_{F-1}`` then ``y`` in row-major ``(customer, facility)``
    order. The cost ``sum f_j x_j + sum d_ij y_ij`` is negated for maximization.
    """
    n_cust, n_fac = d.shape
    nv = n_fac + n_cust * n_fac

    def y(i: int, j: int) -> int:
        return n_fac + i * n_fac + j

    c = np.concatenate([-f, -d.reshape(-1)])
    rows = []
    for i in range(n_cust):
        row = np.zeros(nv)
        row[[y(i, j) for j in range(n_fac)]] = 1.0
        rows.append((row, "eq", 1.0))
    for i in range(n_cust):
        for j in range(n_fac):
            row = np.zeros(nv)
            row[y(i, j)] = 1.0
            row[j] = -1.0
            rows.append((row, "le", 0.0))
    return MilpInstance.from_rows(c, rows, range(n_fac), header)


def gen_facility_location(n_fac: int, n_cust: int, seed: int) -> MilpInstance:
    """Assignment costs ``U[0, 1e4]`` and opening costs ``U[0, 3e3]``."""
    if n_fac < 1 or n_cust < 1:
        raise ValueError("sizes must be >= 1")
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.0, 1e4, size=(n_cust, n_fac))
    f = rng.uniform(0.0, 3e3, size=n_fac)
    head = [f"facility n_fac={n_fac} n_cust={n_cust} seed={seed}", "minimize cost = -objective"]
    return facility_location_milp(f, d, head)


def kmeans_milp(dist: np.ndarray, k: int, header: Sequence[str] = ()) -> MilpInstance:
    """Pick ``k`` centers ``x_j`` and assign each point ``i`` to one open center via ``y_ij``.

    Variables are ``x`` then ``y`` row-major; all binary. Cost ``sum d_ij y_ij`` negated.
    """
    n = dist.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n_pts")
    nv = n + n * n

    def y(i: int, j: int) -> int:
        return n + i * n + j

    c = np.concatenate([np.zeros(n), -dist.reshape(-1)])
    rows = [(np.concatenate([np.ones(n), np.zeros(n * n)]), "eq", float(k))]
    for i in range(n):
        row = np.zeros(nv)
        row[[y(i, j) for j in range(n)]] = 1.0
        rows.append((row, "eq", 1.0))
    for i in range(n):
        for j in range(n):
            row = np.zeros(nv)
            row[y(i, j)] = 1.0
            row[j] = -1.0
            rows.append((row, "le", 0.0))
    return MilpInstance.from_rows(c, rows, range(nv), header)


def gen_kmeans(n_pts: int, k: int, seed: int) -> MilpInstance:
    """Asymmetric distances ``U[0,1]`` with zero diagonal (no triangle inequality)."""
    rng = np.random.default_rng(seed)
    dist = rng.uniform(0.0, 1.0, size=(n_pts, n_pts))
    np.fill_diagonal(dist, 0.0)
    return kmeans_milp(dist, k, [f"kmeans n_pts={n_pts} k={k} seed={seed}", "minimize cost = -objective"])


def linear_separator_milp(points: np.ndarray, labels: np.ndarray, header: Sequence[str] = ()) -> MilpInstance:
    """Fewest mislabeled points for a homogeneous separator ``w`` in ``[-1, 1]^dim``.

    Variables are mislabel flags ``x_i`` then ``u_k = (w_k + 1) / 2`` in ``[0, 1]``.
    Row ``i`` reads ``z_i <p_i, w> >= -M x_i + SEP_MARGIN`` with ``M = max ||p_i||_1 + 1``.
    """
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels, dtype=float)
    n_pts, dim = points.shape
    big_m = float(np.abs(points).sum(axis=1).max()) + 1.0
    c = np.concatenate([-np.ones(n_pts), np.zeros(dim)])
    rows = []
    for i in range(n_pts):
        row = np.zeros(n_pts + dim)
        row[i] = big_m
        row[n_pts:] = 2.0 * labels[i] * points[i]
        rows.append((row, "ge", SEP_MARGIN + float(labels[i] * points[i].sum())))
    head = list(header) + [f"w_k = 2 * x_{n_pts}+k - 1 for k in 0..{dim - 1}", f"M={big_m!r}"]
    return MilpInstance.from_rows(c, rows, range(n_pts), head)


def gen_linear_separator(n_pts: int, dim: int, n_flips: int, seed: int) -> MilpInstance:
    """Gaussian points labeled by a Gaussian separator, then ``n_flips`` labels flipped."""
    if not 0 <= n_flips <= n_pts:
        raise ValueError("need 0 <= n_flips <= n_pts")
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((n_pts, dim))
    w_true = rng.standard_normal(dim)
    labels = np.where(points @ w_true >= 0, 1.0, -1.0)
    flip = rng.choice(n_pts, size=n_flips, replace=False)
    labels[flip] *= -1
    head = [f"linsep n_pts={n_pts} dim={dim} n_flips={n_flips} seed={seed}", "minimize mislabels = -objective"]
    return linear_separator_milp(points, labels, head)


def random_binary_milp(n: int, n_rows: int, seed: int, n_continuous: int = 0) -> MilpInstance:
    """Small random packing-style instance, feasible at the origin."""
    rng = np.random.default_rng(seed)
    nv = n + n_continuous
    c = np.round(rng.uniform(-2.0, 10.0, size=nv), 3)
    rows = []
    for _ in range(n_rows):
        a = np.round(rng.uniform(0.0, 10.0, size=nv), 3)
        rows.append((a, "le", float(np.round(a.sum() * rng.uniform(0.3, 0.7), 3))))
    return MilpInstance.from_rows(c, rows, range(n), [f"random n={n} rows={n_rows} seed={seed}"])


__all__ = [
    "FamilyParams", "WorstCaseMixture", "family_F", "family_G", "jeroslow", "knapsack_example",
    "worst_case_mixture", "gen_winner_determination", "gen_facility_location", "gen_kmeans",
    "gen_linear_separator", "winner_determination_milp", "facility_location_milp", "kmeans_milp",
    "linear_separator_milp", "random_binary_milp", "SEP_MARGIN",
]
