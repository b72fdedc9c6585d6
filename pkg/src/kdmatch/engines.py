"""Online matching engines: RANKING, the OCS-based rule, Random and Greedy.

Every engine is deterministic given its randomness. Scalar engines take any
object with a ``random()`` method returning a float in [0, 1) (a
:class:`~kdmatch.seeding.SplitMix64` or a ``numpy.random.Generator``). Batch
engines take an array of per-trial SplitMix64 seeds and return the
assignment matrix; row t equals the scalar run with ``SplitMix64(seeds[t])``.

Draw discipline (shared by both forms):
  ranking  n draws up front; servers sorted by draw, stable
  ocs      one draw per request with a nonempty available set
  greedy   one draw per request with a nonempty available set
  random   one draw per request
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .candidate import CandidateFunction
from .instance import UNMATCHED, Instance, MatchingOutcome
from .seeding import uniform_at

__all__ = [
    "RankAssignment",
    "OcsStep",
    "OcsTrace",
    "random_ranks",
    "run_ranking",
    "run_ocs",
    "run_random",
    "run_greedy",
    "ocs_weight_levels",
    "ranking_batch",
    "ocs_batch",
    "random_batch",
    "greedy_batch",
    "run_batch",
    "ALGOS",
]

ALGOS = ("ranking", "ocs", "random", "greedy")


@dataclass(frozen=True)
class RankAssignment:
    """``order[p]`` is the server holding rank position p (0 = smallest rank)."""

    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(s) for s in self.order))
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError("order must be a permutation of 0..n-1")

    def positions(self) -> list[int]:
        pos = [0] * len(self.order)
        for p, s in enumerate(self.order):
            pos[s] = p
        return pos


def random_ranks(n: int, rng) -> RankAssignment:
    draws = np.array([rng.random() for _ in range(n)], dtype=float)
    return RankAssignment(tuple(np.argsort(draws, kind="stable")))


def run_ranking(inst: Instance, ranks: RankAssignment) -> MatchingOutcome:
    if len(ranks.order) != inst.server_count:
        raise ValueError(f"rank permutation has length {len(ranks.order)}, expected {inst.server_count}")
    pos = ranks.positions()
    matched = [False] * inst.server_count
    assignment = []
    for nb in inst.requests:
        best = UNMATCHED
        for s in nb:
            if not matched[s] and (best == UNMATCHED or pos[s] < pos[best]):
                best = s
        if best != UNMATCHED:
            matched[best] = True
        assignment.append(best)
    return MatchingOutcome(tuple(assignment), tuple(matched))


@dataclass(frozen=True)
class OcsStep:
    request: int
    available: tuple[int, ...]
    weights: tuple[float, ...]
    choice: int


@dataclass
class OcsTrace:
    """Per-request decisions plus the final per-server degree and matched flag."""

    steps: list[OcsStep] = field(default_factory=list)
    degrees: list[int] = field(default_factory=list)
    matched: list[bool] = field(default_factory=list)


def _check_range(inst: Instance, f: CandidateFunction) -> None:
    # the largest level ever looked up is (max server degree - 1)
    need = inst.max_server_degree() - 1
    if not f.top_infinite and need > f.L:
        raise ValueError(f"candidate tabulated to level {f.L}, instance needs level {need}")


def ocs_weight_levels(inst: Instance, f: CandidateFunction) -> list[np.ndarray]:
    """For each request, f(l_s^{r-1}) of its neighbors in neighbor order.

    With ``top_infinite`` every level >= L maps to +inf.
    """
    _check_range(inst, f)
    deg = [0] * inst.server_count
    out = []
    for nb in inst.requests:
        w = np.array([math.inf if (f.top_infinite and deg[s] >= f.L) else f.values[deg[s]] for s in nb])
        out.append(w)
        for s in nb:
            deg[s] += 1
    return out


def _pick_weighted(weights: Sequence[float], u: float) -> int:
    total = 0.0
    cum = []
    for w in weights:
        total += w
        cum.append(total)
    thr = u * total
    for i, c in enumerate(cum):
        if c > thr:
            return i
    return len(cum) - 1


def run_ocs(inst: Instance, f: CandidateFunction, rng, trace: bool = False):
    """OCS-based algorithm; returns the outcome, or (outcome, trace) with ``trace``."""
    weights = ocs_weight_levels(inst, f)
    matched = [False] * inst.server_count
    deg = [0] * inst.server_count
    assignment = []
    tr = OcsTrace() if trace else None
    for r, nb in enumerate(inst.requests):
        avail = [i for i, s in enumerate(nb) if not matched[s]]
        choice = UNMATCHED
        if avail:
            u = rng.random()
            w = [float(weights[r][i]) for i in avail]
            top = [j for j, x in enumerate(w) if math.isinf(x)]
            if top:
                j = top[min(int(u * len(top)), len(top) - 1)]
            else:
                j = _pick_weighted(w, u)
            choice = nb[avail[j]]
            matched[choice] = True
            if tr is not None:
                tr.steps.append(OcsStep(r, tuple(nb[i] for i in avail), tuple(w), choice))
        elif tr is not None:
            tr.steps.append(OcsStep(r, (), (), UNMATCHED))
        assignment.append(choice)
        for s in nb:
            deg[s] += 1
    out = MatchingOutcome(tuple(assignment), tuple(matched))
    if tr is not None:
        tr.degrees = deg
        tr.matched = list(matched)
        return out, tr
    return out


def run_random(inst: Instance, rng) -> MatchingOutcome:
    """Each request proposes to a uniform neighbor; a taken server rejects it."""
    matched = [False] * inst.server_count
    assignment = []
    for nb in inst.requests:
        u = rng.random()
        s = nb[min(int(u * len(nb)), len(nb) - 1)]
        if matched[s]:
            assignment.append(UNMATCHED)
        else:
            matched[s] = True
            assignment.append(s)
    return MatchingOutcome(tuple(assignment), tuple(matched))


def run_greedy(inst: Instance, rng) -> MatchingOutcome:
    """Uniform choice among the unmatched neighbors."""
    matched = [False] * inst.server_count
    assignment = []
    for nb in inst.requests:
        avail = [s for s in nb if not matched[s]]
        if not avail:
            assignment.append(UNMATCHED)
            continue
        u = rng.random()
        s = avail[min(int(u * len(avail)), len(avail) - 1)]
        matched[s] = True
        assignment.append(s)
    return MatchingOutcome(tuple(assignment), tuple(matched))


# --- batch engines ------------------------------------------------------------


def _kth_true(mask: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Column of the (k+1)-th True in each row (rows must have > k Trues)."""
    cs = np.cumsum(mask, axis=1)
    return np.argmax(cs > k[:, None], axis=1)


def ranking_batch(inst: Instance, seeds: np.ndarray) -> np.ndarray:
    seeds = np.asarray(seeds, dtype=np.uint64)
    T, n = len(seeds), inst.server_count
    draws = uniform_at(seeds[:, None], np.arange(n, dtype=np.uint64)[None, :])
    order = np.argsort(draws, axis=1, kind="stable")
    pos = np.empty_like(order)
    np.put_along_axis(pos, order, np.arange(n)[None, :].repeat(T, axis=0), axis=1)
    matched = np.zeros((T, n), dtype=bool)
    out = np.full((T, inst.request_count), UNMATCHED, dtype=np.int64)
    rows = np.arange(T)
    big = n + 1
    for r, nb in enumerate(inst.requests):
        nb_arr = np.asarray(nb, dtype=np.intp)
        p = np.where(matched[:, nb_arr], big, pos[:, nb_arr])
        j = np.argmin(p, axis=1)
        ok = p[rows, j] < big
        s = nb_arr[j]
        out[ok, r] = s[ok]
        matched[rows[ok], s[ok]] = True
    return out


def ocs_batch(inst: Instance, f: CandidateFunction, seeds: np.ndarray) -> np.ndarray:
    weights = ocs_weight_levels(inst, f)
    seeds = np.asarray(seeds, dtype=np.uint64)
    T = len(seeds)
    counters = np.zeros(T, dtype=np.uint64)
    matched = np.zeros((T, inst.server_count), dtype=bool)
    out = np.full((T, inst.request_count), UNMATCHED, dtype=np.int64)
    for r, nb in enumerate(inst.requests):
        nb_arr = np.asarray(nb, dtype=np.intp)
        avail = ~matched[:, nb_arr]
        live = np.flatnonzero(avail.any(axis=1))
        if live.size == 0:
            continue
        av = avail[live]
        u = uniform_at(seeds[live], counters[live])
        counters[live] += np.uint64(1)
        w = weights[r]
        is_inf = np.isinf(w)
        j = np.empty(live.size, dtype=np.intp)
        inf_av = av & is_inf[None, :]
        use_inf = inf_av.any(axis=1)
        if use_inf.any():
            m = inf_av[use_inf]
            cnt = m.sum(axis=1)
            k = np.minimum((u[use_inf] * cnt).astype(np.int64), cnt - 1)
            j[use_inf] = _kth_true(m, k)
        fin = ~use_inf
        if fin.any():
            a = av[fin]
            cum = np.cumsum(np.where(a, np.where(is_inf, 0.0, w)[None, :], 0.0), axis=1)
            thr = u[fin] * cum[:, -1]
            idx = (cum <= thr[:, None]).sum(axis=1)
            last = a.shape[1] - 1 - np.argmax(a[:, ::-1], axis=1)
            j[fin] = np.minimum(idx, last)
        s = nb_arr[j]
        out[live, r] = s
        matched[live, s] = True
    return out


def random_batch(inst: Instance, seeds: np.ndarray) -> np.ndarray:
    seeds = np.asarray(seeds, dtype=np.uint64)
    T = len(seeds)
    matched = np.zeros((T, inst.server_count), dtype=bool)
    out = np.full((T, inst.request_count), UNMATCHED, dtype=np.int64)
    rows = np.arange(T)
    for r, nb in enumerate(inst.requests):
        nb_arr = np.asarray(nb, dtype=np.intp)
        u = uniform_at(seeds, np.full(T, r, dtype=np.uint64))
        j = np.minimum((u * len(nb)).astype(np.int64), len(nb) - 1)
        s = nb_arr[j]
        ok = ~matched[rows, s]
        out[ok, r] = s[ok]
        matched[rows[ok], s[ok]] = True
    return out


def greedy_batch(inst: Instance, seeds: np.ndarray) -> np.ndarray:
    seeds = np.asarray(seeds, dtype=np.uint64)
    T = len(seeds)
    counters = np.zeros(T, dtype=np.uint64)
    matched = np.zeros((T, inst.server_count), dtype=bool)
    out = np.full((T, inst.request_count), UNMATCHED, dtype=np.int64)
    for r, nb in enumerate(inst.requests):
        nb_arr = np.asarray(nb, dtype=np.intp)
        avail = ~matched[:, nb_arr]
        live = np.flatnonzero(avail.any(axis=1))
        if live.size == 0:
            continue
        av = avail[live]
        u = uniform_at(seeds[live], counters[live])
        counters[live] += np.uint64(1)
        cnt = av.sum(axis=1)
        k = np.minimum((u * cnt).astype(np.int64), cnt - 1)
        s = nb_arr[_kth_true(av, k)]
        out[live, r] = s
        matched[live, s] = True
    return out


def run_batch(inst: Instance, algo: str, seeds: np.ndarray, f: CandidateFunction | None = None) -> np.ndarray:
    """Dispatch to a batch engine by name; ``f`` is required for ``ocs``."""
    if algo == "ranking":
        return ranking_batch(inst, seeds)
    if algo == "ocs":
        if f is None:
            raise ValueError("ocs needs a candidate function")
        return ocs_batch(inst, f, seeds)
    if algo == "random":
        return random_batch(inst, seeds)
    if algo == "greedy":
        return greedy_batch(inst, seeds)
    raise ValueError(f"unknown algorithm {algo!r}")
