"""Candidate functions for the OCS-based algorithm.

A candidate function for parameter d is a non-decreasing f with f(0) = 1 such
that for every 1 <= m < d and every non-decreasing l_1 <= ... <= l_m,

    1 + sum_i f(l_i) / (d - m)  >=  prod_i f(l_i + 1) / f(l_i).

Such an f bounds the probability that a server of degree l is still
unmatched by 1/f(l).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "CandidateFunction",
    "GBoundSeries",
    "ConstraintViolation",
    "optimal_candidate",
    "geometric_candidate",
    "ghhnyz_candidate",
    "constant_candidate",
    "semi_ocs_candidate",
    "make_candidate",
    "verify_candidate",
    "exhaustive_check_count",
    "alpha",
    "log_alpha_dt",
    "min_alpha_certified",
    "g_bound",
]


@dataclass(frozen=True)
class CandidateFunction:
    """Tabulated f(0..L).

    With ``top_infinite`` the last entry is +inf: a server whose degree
    reaches L is always preferred. Only the engines honor this.
    """

    d: int
    values: tuple[float, ...]
    top_infinite: bool = False
    name: str = ""

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if self.top_infinite and vals:
            vals = vals[:-1] + (math.inf,)
        object.__setattr__(self, "values", vals)
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if not vals or vals[0] != 1.0:
            raise ValueError("f(0) must equal 1")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("candidate values must be non-decreasing")
        finite = vals[:-1] if self.top_infinite else vals
        if any(not math.isfinite(v) for v in finite):
            raise ValueError("only the top value may be infinite")

    @property
    def L(self) -> int:
        return len(self.values) - 1

    def __call__(self, l: int) -> float:
        return self.values[l]

    def ratio(self, l: int | None = None) -> float:
        """1 - 1/f(l), by default at l = d."""
        return 1.0 - 1.0 / self.values[self.d if l is None else l]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def _ratio_step(x: float, d: int) -> float:
    # min over m of (1 + m x / (d - m))^(1/m), scanned explicitly
    m = np.arange(1, d, dtype=float)
    return float(np.exp(np.log1p(m * x / (d - m)) / m).min())


def optimal_candidate(d: int, L: int) -> CandidateFunction:
    """The pointwise largest candidate function f*, levels 0..L."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if L < 0:
        raise ValueError("L must be non-negative")
    vals = [1.0]
    for _ in range(L):
        x = vals[-1]
        vals.append(x * _ratio_step(x, d))
    return CandidateFunction(d, tuple(vals), name="optimal")


def geometric_candidate(d: int, L: int) -> CandidateFunction:
    if d < 2:
        raise ValueError("d must be at least 2")
    q = d / (d - 1)
    return CandidateFunction(d, tuple(q**l for l in range(L + 1)), name="geometric")


def ghhnyz_candidate(d: int, L: int) -> CandidateFunction:
    if d < 2:
        raise ValueError("d must be at least 2")
    vals = [math.exp(l / d + l**2 / (2 * d**2) + 0.179 * l**3 / d**3) for l in range(L + 1)]
    return CandidateFunction(d, tuple(vals), name="ghhnyz")


def constant_candidate(d: int, L: int) -> CandidateFunction:
    return CandidateFunction(d, (1.0,) * (L + 1), name="constant")


def semi_ocs_candidate() -> CandidateFunction:
    """d = 2 semi-OCS mode: f(0) = 1 and an infinite weight from degree 1 on."""
    return CandidateFunction(2, (1.0, math.inf), top_infinite=True, name="semi2")


_FACTORIES = {
    "optimal": optimal_candidate,
    "geometric": geometric_candidate,
    "ghhnyz": ghhnyz_candidate,
    "constant": constant_candidate,
}


def make_candidate(kind: str, d: int, L: int) -> CandidateFunction:
    """Look up a candidate family by name (``semi2`` ignores d and L)."""
    if kind == "semi2":
        return semi_ocs_candidate()
    try:
        return _FACTORIES[kind](d, L)
    except KeyError:
        raise ValueError(f"unknown candidate {kind!r}") from None


@dataclass(frozen=True)
class ConstraintViolation:
    m: int
    sequence: tuple[int, ...]
    lhs: float
    rhs: float


def exhaustive_check_count(d: int, L_max: int) -> int:
    """Size of the largest enumeration block, C(L_max + d - 1, d - 1)."""
    return math.comb(L_max + d - 1, d - 1)


def verify_candidate(
    f: CandidateFunction,
    L_max: int,
    mode: str = "exhaustive",
    cap: int = 10**7,
    rtol: float = 1e-12,
) -> list[ConstraintViolation]:
    """All violated constraints with every l_i <= L_max.

    ``fast`` checks only constant sequences, ``exhaustive`` every
    non-decreasing one. A constraint counts as violated when
    rhs > lhs * (1 + rtol), which absorbs rounding in tight cases.
    """
    if mode not in ("fast", "exhaustive"):
        raise ValueError("mode must be 'fast' or 'exhaustive'")
    if L_max < 0:
        raise ValueError("L_max must be non-negative")
    if f.L < L_max + 1:
        raise ValueError(f"f is tabulated to level {f.L}, need {L_max + 1}")
    vals = f.as_array()[: L_max + 2]
    if not np.isfinite(vals).all():
        raise ValueError("constraints are only defined for finite values")
    d = f.d
    if mode == "exhaustive" and exhaustive_check_count(d, L_max) > cap:
        raise ValueError(
            f"exhaustive check needs {exhaustive_check_count(d, L_max)} sequences, above cap {cap}"
        )
    step = vals[1:] / vals[:-1]
    out: list[ConstraintViolation] = []
    for m in range(1, d):
        if mode == "fast":
            seqs = np.repeat(np.arange(L_max + 1)[:, None], m, axis=1)
        else:
            seqs = np.array(list(combinations_with_replacement(range(L_max + 1), m)), dtype=np.intp)
        lhs = 1.0 + vals[seqs].sum(axis=1) / (d - m)
        rhs = step[seqs].prod(axis=1)
        for idx in np.flatnonzero(rhs > lhs * (1.0 + rtol)):
            out.append(ConstraintViolation(m, tuple(int(v) for v in seqs[idx]), float(lhs[idx]), float(rhs[idx])))
    return out


# --- continuous lower bound g_d ---------------------------------------------


def alpha(x, t):
    """(1 + x t / (1 - t))^(1/t) for t in (0, 1).

    Substituting t = m/d turns the f* recurrence factor into alpha(x, m/d)^(1/d),
    so the minimum over t in (0, 1) bounds the minimum over m from below.
    """
    t = np.asarray(t, dtype=float)
    return np.exp((np.log1p((np.asarray(x) - 1.0) * t) - np.log1p(-t)) / t)


def log_alpha_dt(x: float, t: float) -> float:
    """d/dt of log alpha(x, t)."""
    y = x - 1.0
    log_term = math.log1p(y * t) - math.log1p(-t)
    return -log_term / (t * t) + (y / (1.0 + y * t) + 1.0 / (1.0 - t)) / t


def _alpha_scalar(x: float, t: float) -> float:
    return math.exp((math.log1p((x - 1.0) * t) - math.log1p(-t)) / t)


def min_alpha_certified(
    x: float,
    eps_edge: float = 1e-6,
    bs_precision: float = 1e-15,
    error_margin: float = 1e-6,
) -> float:
    """Certified lower bound on min over t in (0,1) of alpha(x, t), for 1 <= x < 10.

    Since (1 + (x-1) t) / (1 - t) >= 1 + x t, alpha is at least
    (1 + eps_edge x)^(1/eps_edge) on (0, eps_edge], and above 1/eps_edge
    on [1 - eps_edge, 1). On
    [eps_edge, 1 - eps_edge] log alpha is convex, so bisecting on the sign of
    its derivative brackets the minimiser; the value at the right end of the
    final bracket, less ``error_margin``, is below every alpha in the bracket
    because |d alpha/dt| < 1e9 at this range of x.
    """
    if not 1.0 <= x < 10.0:
        raise ValueError("x must lie in [1, 10)")
    lo, hi = eps_edge, 1.0 - eps_edge
    if log_alpha_dt(x, lo) >= 0:
        hi = lo
    elif log_alpha_dt(x, hi) <= 0:
        lo = hi
    else:
        while hi - lo > bs_precision:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if log_alpha_dt(x, mid) < 0:
                lo = mid
            else:
                hi = mid
    delta = _alpha_scalar(x, hi)
    edge = (1.0 + eps_edge * x) ** (1.0 / eps_edge)
    return min(edge, delta - error_margin)


@dataclass(frozen=True)
class GBoundSeries:
    d: int
    values: tuple[float, ...]
    eps_edge: float = 1e-6
    bs_precision: float = 1e-15
    error_margin: float = 1e-6
    certified: bool = True

    @property
    def L(self) -> int:
        return len(self.values) - 1

    def ratio(self, l: int | None = None) -> float:
        return 1.0 - 1.0 / self.values[self.d if l is None else l]


def g_bound(
    d: int,
    L: int,
    eps_edge: float = 1e-6,
    bs_precision: float = 1e-15,
    error_margin: float = 1e-6,
) -> GBoundSeries:
    """g_d(0..L) with g_d(l) = g_d(l-1) * (min_t alpha(g_d(l-1), t))^(1/d).

    Once g_d(l-1) reaches 10 the last certified minimum is reused and the
    series is marked uncertified.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    vals = [1.0]
    certified = True
    last = None
    for _ in range(L):
        x = vals[-1]
        if x < 10.0:
            last = min_alpha_certified(x, eps_edge, bs_precision, error_margin)
        else:
            certified = False
        vals.append(x * last ** (1.0 / d))
    return GBoundSeries(d, tuple(vals), eps_edge, bs_precision, error_margin, certified)
