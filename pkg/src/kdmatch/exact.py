"""Exact expectation oracles.

* :func:`ranking_exact` enumerates server rank orders, with a decomposition
  that keeps the hard instances tractable.
* :func:`dp_exact` propagates the law of the matched-server set for the
  OCS, Greedy and Random rules.
* :func:`markov_expected_matched` is the chain describing how many of the
  d-1 shared servers of the general-d RANKING instance get matched.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .candidate import CandidateFunction
from .engines import ocs_weight_levels
from .generators import gen_small_d_ranking_hard, small_d_server
from .instance import Instance

__all__ = [
    "RankingExact",
    "SmallDExact",
    "DPResult",
    "GSample",
    "ranking_exact",
    "ranking_exact_smalld",
    "enumerate_component",
    "dp_exact",
    "ocs_exact",
    "greedy_exact",
    "random_exact",
    "markov_expected_matched",
    "check_theta",
    "sample_g",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = math.factorial(12)


# --- RANKING by enumeration ------------------------------------------------------


@numba.njit(cache=True)
def _enumerate_kernel(n, indptr, indices, group_of, n_groups):
    """Run RANKING under every rank order of n servers (Heap's algorithm).

    Returns (histogram of matched count, per-server unmatched counts,
    per-group histogram of unmatched servers in that group).
    """
    n_req = indptr.shape[0] - 1
    hist = np.zeros(n_req + 1, dtype=np.int64)
    unm = np.zeros(n, dtype=np.int64)
    ghist = np.zeros((max(n_groups, 1), n + 1), dtype=np.int64)
    pos = np.arange(n)
    c = np.zeros(n, dtype=np.int64)
    matched = np.zeros(n, dtype=np.bool_)
    gc = np.zeros(max(n_groups, 1), dtype=np.int64)
    i = 0
    first = True
    while True:
        if not first:
            # advance to the next permutation
            while i < n and c[i] >= i:
                c[i] = 0
                i += 1
            if i >= n:
                break
            if i % 2 == 0:
                j = 0
            else:
                j = c[i]
            tmp = pos[j]
            pos[j] = pos[i]
            pos[i] = tmp
            c[i] += 1
            i = 0
        first = False
        for s in range(n):
            matched[s] = False
        cnt = 0
        for r in range(n_req):
            best = -1
            bp = n
            for e in range(indptr[r], indptr[r + 1]):
                s = indices[e]
                if not matched[s] and pos[s] < bp:
                    bp = pos[s]
                    best = s
            if best >= 0:
                matched[best] = True
                cnt += 1
        hist[cnt] += 1
        for g in range(n_groups):
            gc[g] = 0
        for s in range(n):
            if not matched[s]:
                unm[s] += 1
                g = group_of[s]
                if g >= 0:
                    gc[g] += 1
        for g in range(n_groups):
            ghist[g, gc[g]] += 1
    return hist, unm, ghist


@dataclass(frozen=True)
class ComponentCounts:
    """Integer counts over all n! rank orders of one component."""

    n: int
    matched_hist: tuple[int, ...]
    unmatched: tuple[int, ...]
    group_hist: tuple[tuple[int, ...], ...]

    @property
    def total(self) -> int:
        return math.factorial(self.n)

    def expected_matched(self) -> Fraction:
        return Fraction(sum(k * c for k, c in enumerate(self.matched_hist)), self.total)


def enumerate_component(
    n: int,
    requests: list[tuple[int, ...]],
    group_of: list[int] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ComponentCounts:
    """Exact RANKING counts on a local instance with servers 0..n-1."""
    if math.factorial(n) > budget:
        raise ValueError(f"{n}! rank orders exceed the enumeration budget {budget}")
    if group_of is None:
        group_of = [-1] * n
    n_groups = max(group_of, default=-1) + 1
    indptr = np.zeros(len(requests) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(nb) for nb in requests])
    indices = np.array([s for nb in requests for s in nb], dtype=np.int64)
    hist, unm, ghist = _enumerate_kernel(
        n, indptr, indices, np.asarray(group_of, dtype=np.int64), n_groups
    )
    return ComponentCounts(
        n,
        tuple(int(v) for v in hist),
        tuple(int(v) for v in unm),
        tuple(tuple(int(v) for v in row) for row in ghist[:n_groups]),
    )


def _tail_groups(inst: Instance) -> tuple[int, list[tuple[int, ...]], list[int]]:
    """Longest suffix whose requests fall into disjoint identical-neighbor groups.

    Returns (start index of the suffix, group neighbor sets, group sizes).
    """
    owner: dict[int, int] = {}
    sets: list[tuple[int, ...]] = []
    sizes: list[int] = []
    start = inst.request_count
    for r in range(inst.request_count - 1, -1, -1):
        nb = tuple(sorted(inst.requests[r]))
        gs = {owner.get(s) for s in nb}
        if gs == {None}:
            g = len(sets)
            sets.append(nb)
            sizes.append(1)
            for s in nb:
                owner[s] = g
        elif len(gs) == 1 and sets[next(iter(gs))] == nb:
            sizes[next(iter(gs))] += 1
        else:
            break
        start = r
    return start, sets, sizes


def _components(n: int, requests) -> list[list[int]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for nb in requests:
        for s in nb[1:]:
            ra, rb = find(nb[0]), find(s)
            if ra != rb:
                parent[rb] = ra
    comps = defaultdict(list)
    for s in range(n):
        comps[find(s)].append(s)
    return sorted(comps.values())


def _convolve(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@dataclass(frozen=True)
class RankingExact:
    expected: Fraction
    opt: int
    blocks: int

    @property
    def ratio(self) -> Fraction:
        return self.expected / self.opt

    @property
    def value(self) -> float:
        return float(self.expected)


def ranking_exact(inst: Instance, budget: int = DEFAULT_BUDGET) -> RankingExact:
    """Exact E[matched] of RANKING under a uniform rank order.

    The longest tail of requests that splits into disjoint groups with a
    common neighbor set is peeled off: a group of q requests over N matches
    min(q, #unmatched servers of N). The remaining prefix splits into
    connected components with independent rank orders; each is enumerated
    once per distinct local structure, and the per-group unmatched counts are
    convolved across components.
    """
    from .instance import offline_optimum

    start, sets, sizes = _tail_groups(inst)
    prefix = inst.requests[:start]
    group_of = [-1] * inst.server_count
    for g, nb in enumerate(sets):
        for s in nb:
            group_of[s] = g
    comps = _components(inst.server_count, prefix)
    req_of_comp: dict[int, list[tuple[int, ...]]] = defaultdict(list)
    comp_id = {}
    for ci, comp in enumerate(comps):
        for s in comp:
            comp_id[s] = ci
    for nb in prefix:
        req_of_comp[comp_id[nb[0]]].append(nb)

    cache: dict[tuple, ComponentCounts] = {}
    expected = Fraction(0)
    # per group: integer weight distribution of the unmatched count and its denominator
    gdist = [[1] for _ in sets]
    gden = [1] * len(sets)
    for ci, comp in enumerate(comps):
        local = {s: i for i, s in enumerate(comp)}
        lreq = tuple(tuple(local[s] for s in nb) for nb in req_of_comp[ci])
        # relabel groups by first appearance so that isomorphic blocks share a key
        gmap: dict[int, int] = {}
        lgroup = []
        for s in comp:
            g = group_of[s]
            if g >= 0 and g not in gmap:
                gmap[g] = len(gmap)
            lgroup.append(gmap[g] if g >= 0 else -1)
        key = (len(comp), lreq, tuple(lgroup))
        if key not in cache:
            cache[key] = enumerate_component(len(comp), list(lreq), lgroup, budget)
        cc = cache[key]
        expected += cc.expected_matched()
        for g, lg in gmap.items():
            gdist[g] = _convolve(gdist[g], list(cc.group_hist[lg]))
            gden[g] *= cc.total
    for g, q in enumerate(sizes):
        num = sum(min(q, u) * w for u, w in enumerate(gdist[g]))
        expected += Fraction(num, gden[g])
    return RankingExact(expected, offline_optimum(inst), len(cache))


@dataclass(frozen=True)
class SmallDExact:
    """``p[l]`` is Pr[the level-4 server of index l in a component is unmatched
    when the tail groups arrive]; the same in every component."""

    d: int
    p: tuple[Fraction, ...]
    prefix_expected: Fraction
    tail_expected: Fraction

    @property
    def ratio(self) -> Fraction:
        d = self.d
        return (d * self.prefix_expected + self.tail_expected) / (2 * d * d)

    @property
    def value(self) -> float:
        return float(self.ratio)


def _expected_capped_binomial(n: int, p: Fraction, cap: int) -> Fraction:
    return sum(
        (min(u, cap) * math.comb(n, u) * p**u * (1 - p) ** (n - u) for u in range(n + 1)),
        Fraction(0),
    )


def ranking_exact_smalld(d: int, heavy: bool = False, budget: int | None = None) -> SmallDExact:
    """Exact RANKING ratio on the 2d-component instance, enumerating one component.

    The components are identical and independent until the tail arrives, and
    tail group l sees exactly the index-l level-4 server of each component, so
    its unmatched count is Binomial(d, p[l]). The p[l] are not all equal:
    later level-3 requests find their level-2 neighbors taken more often.
    Default budget covers d <= 5; ``heavy`` raises it to 12! for d = 6.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if budget is None:
        budget = math.factorial(12) if heavy else math.factorial(10)
    full = gen_small_d_ranking_hard(d)
    n = 2 * d
    block = set(range(n))
    reqs = [nb for nb in full.requests if set(nb) <= block]
    top = [small_d_server(d, 1, d + j) for j in range(1, d + 1)]
    cc = enumerate_component(n, reqs, None, budget)
    ps = tuple(Fraction(cc.unmatched[s], cc.total) for s in top)
    tail = sum((_expected_capped_binomial(d, p, d - 1) for p in ps), Fraction(0))
    return SmallDExact(d, ps, cc.expected_matched(), tail)


# --- DP over matched sets -----------------------------------------------------------


@dataclass(frozen=True)
class DPResult:
    """Exact law of an online rule.

    ``unmatched[r, s]`` is Pr[s unmatched after request r is processed];
    ``edge[r, s]`` is Pr[r is matched to s]; ``count_dist[c]`` is
    Pr[matched_count = c].
    """

    expected: float | Fraction
    unmatched: np.ndarray
    edge: np.ndarray
    count_dist: tuple

    def unmatched_by_degree(self, inst: Instance) -> dict[int, list[tuple[int, float]]]:
        """Per server: (degree l, Pr[unmatched right after its l-th neighbor arrived])."""
        out: dict[int, list[tuple[int, float]]] = defaultdict(list)
        deg = [0] * inst.server_count
        for r, nb in enumerate(inst.requests):
            for s in nb:
                deg[s] += 1
                out[s].append((deg[s], self.unmatched[r, s]))
        return dict(out)


def _rule_probs(rule, nb, avail_idx, w, one):
    """Map position in nb -> probability of that choice."""
    if rule == "random":
        p = one / len(nb)
        return {i: p for i in range(len(nb))}
    if not avail_idx:
        return {}
    if rule == "greedy":
        p = one / len(avail_idx)
        return {i: p for i in avail_idx}
    top = [i for i in avail_idx if math.isinf(w[i])]
    if top:
        p = one / len(top)
        return {i: p for i in top}
    ws = [w[i] for i in avail_idx]
    tot = sum(ws, one * 0)
    return {i: wi / tot for i, wi in zip(avail_idx, ws)}


def dp_exact(
    inst: Instance,
    rule: str,
    f: CandidateFunction | None = None,
    exact: bool = False,
    cap: int = 22,
) -> DPResult:
    """Exact law of ``rule`` in {ocs, greedy, random} by propagating matched sets.

    With ``exact`` all probabilities are Fractions (finite weights are
    converted exactly from their binary values).
    """
    if inst.server_count > cap:
        raise ValueError(f"{inst.server_count} servers exceed the DP cap {cap}")
    if rule not in ("ocs", "greedy", "random"):
        raise ValueError(f"unknown rule {rule!r}")
    one = Fraction(1) if exact else 1.0
    if rule == "ocs":
        if f is None:
            raise ValueError("ocs needs a candidate function")
        levels = ocs_weight_levels(inst, f)
        weights = [[w if math.isinf(w) else (Fraction(float(w)) if exact else float(w)) for w in row] for row in levels]
    else:
        weights = [None] * inst.request_count
    n, R = inst.server_count, inst.request_count
    dtype = object if exact else float
    unmatched = np.zeros((R, n), dtype=dtype)
    edge = np.zeros((R, n), dtype=dtype)
    states: dict[int, object] = {0: one}
    for r, nb in enumerate(inst.requests):
        nxt: dict[int, object] = defaultdict(lambda: one * 0)
        for mask, pr in states.items():
            avail = [i for i, s in enumerate(nb) if not (mask >> s) & 1]
            probs = _rule_probs(rule, nb, avail, weights[r], one)
            stay = pr
            for i, q in probs.items():
                s = nb[i]
                if (mask >> s) & 1:
                    continue  # rejected proposal
                mass = pr * q
                nxt[mask | (1 << s)] += mass
                edge[r, s] += mass
                stay -= mass
            # ocs and greedy always match when something is available
            if (rule == "random" or not probs) and stay != 0:
                nxt[mask] += stay
        states = dict(nxt)
        for mask, pr in states.items():
            for s in range(n):
                if not (mask >> s) & 1:
                    unmatched[r, s] += pr
    dist = defaultdict(lambda: one * 0)
    for mask, pr in states.items():
        dist[bin(mask).count("1")] += pr
    count_dist = tuple(dist[c] for c in range(max(dist, default=0) + 1))
    expected = sum((c * p for c, p in enumerate(count_dist)), one * 0)
    if R == 0:
        unmatched = np.zeros((0, n), dtype=dtype)
    return DPResult(expected, unmatched, edge, count_dist)


def ocs_exact(inst: Instance, f: CandidateFunction, exact: bool = False, cap: int = 22) -> DPResult:
    return dp_exact(inst, "ocs", f, exact=exact, cap=cap)


def greedy_exact(inst: Instance, exact: bool = False, cap: int = 22) -> DPResult:
    return dp_exact(inst, "greedy", exact=exact, cap=cap)


def random_exact(inst: Instance, exact: bool = False, cap: int = 22) -> DPResult:
    return dp_exact(inst, "random", exact=exact, cap=cap)


# --- Markov chain and the (m, g) variables ----------------------------------------


def check_theta(theta, d: int) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    if th.shape[-1] != d - 1:
        raise ValueError(f"theta needs {d - 1} entries, got {th.shape[-1]}")
    if ((th < 0) | (th > 1)).any() or (np.diff(th, axis=-1) < 0).any():
        raise ValueError("theta must be sorted within [0, 1]")
    return th


def markov_expected_matched(theta, d: int):
    """Expected number of the d-1 shared servers matched, given their sorted ranks.

    State a counts matched shared servers. Each of the d steps advances from
    a to a+1 with probability 1 - theta[a] (a < d-1) and stays otherwise;
    a = d-1 is absorbing. ``theta`` may carry leading batch dimensions.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    th = check_theta(theta, d)
    batch = th.shape[:-1]
    dist = np.zeros(batch + (d,))
    dist[..., 0] = 1.0
    adv = 1.0 - th  # advance probability out of state a, a = 0..d-2
    for _ in range(d):
        move = dist[..., :-1] * adv
        dist = dist.copy()
        dist[..., :-1] -= move
        dist[..., 1:] += move
    out = (dist * np.arange(d)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GSample:
    m: np.ndarray
    g: np.ndarray


def sample_g(d: int, rng, size: int | None = None) -> GSample:
    """m_i = max of i uniforms (drawn as U^(1/i)), g_i = prod_{j >= i} m_j."""
    if d < 2:
        raise ValueError("d must be at least 2")
    rng = np.random.default_rng(rng)
    shape = (d - 1,) if size is None else (size, d - 1)
    i = np.arange(1, d, dtype=float)
    m = rng.random(shape) ** (1.0 / i)
    g = np.flip(np.cumprod(np.flip(m, axis=-1), axis=-1), axis=-1)
    return GSample(m, g)
