"""Constructors for the hard instance families and small test graphs.

Paper vertex names are 1-based (``s_1``, ``r_1``); instances here are 0-based,
so ``s_i`` is server ``i - 1`` unless a function documents another layout.
"""

from __future__ import annotations

import math

import numpy as np

from .instance import Instance

__all__ = [
    "gen_general_ranking_hard",
    "gen_small_d_ranking_hard",
    "small_d_server",
    "gen_kd_ranking_hard",
    "gen_two_phase_adversary",
    "gen_cycle",
    "gen_toy",
    "random_bounded_instance",
]


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def gen_general_ranking_hard(d: int) -> Instance:
    """2d-1 servers and requests; d-regular.

    Servers 0..d-1 form S1, d..2d-2 form S2. Requests 0..d-1 (R1) see their own
    S1 server plus all of S2; requests d..2d-2 (R2) see all of S1.
    """
    _need(d >= 2, "d must be at least 2")
    s2 = tuple(range(d, 2 * d - 1))
    reqs = [(i,) + s2 for i in range(d)]
    reqs += [tuple(range(d))] * (d - 1)
    return Instance(2 * d - 1, tuple(reqs), d=d, k=d, label=f"general-ranking-hard(d={d})")


def small_d_server(d: int, component: int, j: int) -> int:
    """Index of server s_j^i (1-based component i <= d, 1 <= j <= 2d)."""
    return (component - 1) * 2 * d + (j - 1)


def gen_small_d_ranking_hard(d: int) -> Instance:
    """The 2d-component instance; 2d^2 servers, 2d^2 requests, d-regular.

    Component i <= d owns servers s_1^i..s_2d^i (contiguous block), and its
    requests arrive as r_0^i, r_1^i, ..., r_d^i. The (d-1)-request groups of
    components d+1..2d arrive last, group by group.
    """
    _need(d >= 2, "d must be at least 2")
    reqs: list[tuple[int, ...]] = []
    for i in range(1, d + 1):
        level2 = [small_d_server(d, i, j) for j in range(1, d + 1)]
        reqs.append(tuple(level2))
        for q in range(1, d + 1):
            # s_j^i misses r_{j'}^i where j' = (j mod d) + 1
            nb = [small_d_server(d, i, j) for j in range(1, d + 1) if (j % d) + 1 != q]
            nb.append(small_d_server(d, i, d + q))
            reqs.append(tuple(nb))
    for q in range(1, d + 1):
        group = tuple(small_d_server(d, i, d + q) for i in range(1, d + 1))
        reqs.extend([group] * (d - 1))
    return Instance(2 * d * d, tuple(reqs), d=d, k=d, label=f"small-d-ranking-hard(d={d})")


def gen_kd_ranking_hard(k: int, d: int) -> Instance:
    """(k,d)-bounded generalisation of the general-d instance (k > d >= 2).

    Servers 0..k-1 form S1 and k..k+d-2 form S2. Each S1 server picks k-1 of
    the R2 requests with the lowest current degree, ties by lowest index.
    """
    _need(d >= 2, "d must be at least 2")
    _need(k > d, "k must exceed d")
    s2 = list(range(k, k + d - 1))
    r1 = [[i] + s2 for i in range(k)]
    n_r2 = math.ceil(k * (k - 1) / d)
    r2: list[list[int]] = [[] for _ in range(n_r2)]
    for s in range(k):
        order = sorted(range(n_r2), key=lambda q: (len(r2[q]), q))
        for q in order[: k - 1]:
            r2[q].append(s)
    reqs = tuple(tuple(nb) for nb in r1 + r2)
    return Instance(k + d - 1, reqs, d=d, k=k, label=f"kd-ranking-hard(k={k},d={d})")


def gen_two_phase_adversary(d: int, rng_seed: int | None = 0) -> Instance:
    """d^2 servers on a grid; rows then columns of common-neighbor requests.

    Grid cell (i, j) gets server id ``perm[i*d + j]`` with ``perm`` drawn from
    the seed, which anonymises the construction. ``rng_seed=None`` keeps the
    identity layout.
    """
    _need(d >= 2, "d must be at least 2")
    if rng_seed is None:
        perm = np.arange(d * d)
    else:
        perm = np.random.default_rng(rng_seed).permutation(d * d)
    cell = lambda i, j: int(perm[i * d + j])  # noqa: E731
    reqs = []
    for i in range(d):
        row = tuple(sorted(cell(i, j) for j in range(d)))
        reqs.extend([row] * (d // 2))
    for j in range(d):
        col = tuple(sorted(cell(i, j) for i in range(d)))
        reqs.extend([col] * ((d + 1) // 2))
    return Instance(d * d, tuple(reqs), d=d, k=d, label=f"two-phase(d={d},seed={rng_seed})")


def gen_cycle(n: int) -> Instance:
    """Request i sees servers i and i+1 (mod n)."""
    _need(n >= 3, "n must be at least 3")
    reqs = tuple((i, (i + 1) % n) for i in range(n))
    return Instance(n, reqs, d=2, k=2, label=f"cycle(n={n})")


def gen_toy() -> Instance:
    """Three servers, r1 ~ {s1, s2}, r2 ~ {s2, s3}."""
    return Instance(3, ((0, 1), (1, 2)), d=2, k=1, label="toy")


def random_bounded_instance(k: int, d: int, n_servers: int, rng, max_requests: int = 200) -> Instance:
    """Uniform small random (k,d)-bounded instance.

    Requests with 1..d distinct random neighbors are appended, each including
    at least one server still below degree k, until every server reaches k.
    """
    _need(d >= 1 and k >= 1 and n_servers >= 1, "k, d, n_servers must be positive")
    rng = np.random.default_rng(rng)
    deg = np.zeros(n_servers, dtype=int)
    reqs = []
    while (deg < k).any():
        if len(reqs) >= max_requests:
            raise RuntimeError("request budget exhausted before all servers reached degree k")
        size = int(rng.integers(1, min(d, n_servers) + 1))
        needy = np.flatnonzero(deg < k)
        first = int(rng.choice(needy))
        others = rng.permutation(np.delete(np.arange(n_servers), first))[: size - 1]
        nb = tuple(sorted([first, *map(int, others)]))
        deg[list(nb)] += 1
        reqs.append(nb)
    return Instance(n_servers, tuple(reqs), d=d, k=k, label=f"random(k={k},d={d},n={n_servers})")
