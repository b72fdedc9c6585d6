"""Closed-form competitive-ratio bounds and the comparison rows built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .candidate import optimal_candidate

__all__ = [
    "gamma",
    "eta",
    "harmonic",
    "marking_cw18",
    "high_degree",
    "kd_ranking_ub",
    "kd_ocs_lb",
    "ocs_lb",
    "semi_ocs_ratio",
    "SMALL_D_RANKING_UB",
    "ranking_ub",
    "BoundsRow",
    "bounds_table",
    "marking_crossover",
]


def gamma(d: int) -> float:
    """RANKING upper bound from the general-d instance."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return 1.0 - (d - 1) / (2 * d - 1) * (1.0 - 1.0 / d) ** d


def eta(d: int) -> float:
    """Upper bound for every randomized algorithm from the two-phase instance."""
    if d < 2:
        raise ValueError("d must be at least 2")
    c, f = -(-d // 2), d // 2
    q = f / d
    lq, l1q = math.log(q), math.log1p(-q)
    total = 0.0
    for i in range(c + 1, d + 1):
        if d <= 1000:
            term = math.comb(d, i) * q ** (d - i) * (1.0 - q) ** i
        else:
            logc = math.lgamma(d + 1) - math.lgamma(i + 1) - math.lgamma(d - i + 1)
            term = math.exp(logc + (d - i) * lq + i * l1q)
        total += (i - c) / d * term
    return 1.0 - total


def harmonic(d: int) -> float:
    return math.fsum(1.0 / i for i in range(1, d + 1))


def marking_cw18(d: int) -> float:
    """1 - 2 sqrt(H_d / d), clamped at 0."""
    return max(0.0, 1.0 - 2.0 * math.sqrt(harmonic(d) / d))


def high_degree(k: int, d: int) -> float:
    return 1.0 - (1.0 - 1.0 / d) ** k


def kd_ranking_ub(k: int, d: int) -> float:
    if not k >= d >= 2:
        raise ValueError("need k >= d >= 2")
    return 1.0 - (1.0 - 1.0 / d) ** k * (d - 1) / (k + d - 1)


def semi_ocs_ratio(k: int) -> float:
    """d = 2 ratio of the two-way semi-OCS: 1 - 2^-(2^k - 1)."""
    return 1.0 - 2.0 ** -(2**k - 1)


def kd_ocs_lb(k: int, d: int) -> float:
    """OCS lower bound 1 - 1/f*_d(k); d = 2 uses the semi-OCS value."""
    if not k >= d >= 2:
        raise ValueError("need k >= d >= 2")
    if d == 2:
        return semi_ocs_ratio(k)
    return optimal_candidate(d, k).ratio(k)


def ocs_lb(d: int) -> float:
    return kd_ocs_lb(d, d)


# RANKING ratios on the 2d-component instance, as tabulated for d = 2..6
SMALL_D_RANKING_UB = {2: 0.8264, 3: 0.8251, 4: 0.8228, 5: 0.8223, 6: 0.8219}


def ranking_ub(d: int) -> float:
    return min(gamma(d), SMALL_D_RANKING_UB.get(d, 1.0))


@dataclass(frozen=True)
class BoundsRow:
    d: int
    k: int
    ocs_lb: float
    ranking_ub: float
    high_degree: float
    marking_cw18: float
    general_ub: float | None

    def check(self) -> list[str]:
        bad = []
        for name in ("ocs_lb", "ranking_ub", "high_degree", "marking_cw18", "general_ub"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                bad.append(f"{name}={v} outside [0, 1]")
        if self.general_ub is not None and self.ocs_lb > self.general_ub:
            bad.append("ocs_lb exceeds general_ub")
        return bad


def bounds_table(d_list: Iterable[int], k_rule: Callable[[int], int] | None = None) -> list[BoundsRow]:
    """One row per d, with k = k_rule(d) (default k = d).

    ``general_ub`` is only defined on the (d,d) diagonal and is None elsewhere.
    """
    rows = []
    for d in d_list:
        k = d if k_rule is None else int(k_rule(d))
        if k == d:
            rk, ub = ranking_ub(d), eta(d)
        else:
            rk, ub = kd_ranking_ub(k, d), None
        rows.append(BoundsRow(d, k, kd_ocs_lb(k, d), rk, high_degree(k, d), marking_cw18(d), ub))
    return rows


def marking_crossover(lo: int = 3, hi: int = 10000) -> int:
    """Smallest d in (lo, hi] with marking_cw18(d) >= ocs_lb(d), by bisection.

    Assumes a single sign change of the difference on [lo, hi]; returns hi + 1
    if there is none at hi.
    """
    gap = lambda d: ocs_lb(d) - marking_cw18(d)  # noqa: E731
    if gap(hi) > 0:
        return hi + 1
    if gap(lo) <= 0:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi
