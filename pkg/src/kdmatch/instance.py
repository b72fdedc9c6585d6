"""Online bipartite matching instances, validation and the offline optimum.

Servers and requests are dense 0-based integers. The arrival order of the
requests is their position in ``Instance.requests``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Sequence

UNMATCHED = -1

__all__ = [
    "UNMATCHED",
    "Instance",
    "MatchingOutcome",
    "Violation",
    "validate_instance",
    "offline_optimum",
    "check_outcome",
    "canonical_form",
    "relabel_servers",
    "instance_to_dict",
    "instance_from_dict",
    "dump_instance",
    "load_instance",
]


@dataclass(frozen=True)
class Instance:
    """An ordered online input: ``requests[r]`` is the neighbor set of request r.

    ``k`` and ``d`` are the declared degree bounds (every server degree >= k,
    every request degree <= d). They are checked by :func:`validate_instance`,
    not at construction, so that deliberately invalid instances can be built.
    """

    server_count: int
    requests: tuple[tuple[int, ...], ...]
    d: int
    k: int
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(tuple(int(s) for s in nb) for nb in self.requests))
        if self.server_count < 0:
            raise ValueError("server_count must be non-negative")

    @property
    def request_count(self) -> int:
        return len(self.requests)

    def server_degrees(self) -> list[int]:
        deg = [0] * self.server_count
        for nb in self.requests:
            for s in nb:
                if 0 <= s < self.server_count:
                    deg[s] += 1
        return deg

    def max_server_degree(self) -> int:
        return max(self.server_degrees(), default=0)

    def incidence(self) -> list[list[int]]:
        """Per-server list of incident request indices, in arrival order."""
        inc: list[list[int]] = [[] for _ in range(self.server_count)]
        for r, nb in enumerate(self.requests):
            for s in nb:
                inc[s].append(r)
        return inc

    def with_requests(self, requests: Sequence[Sequence[int]], label: str | None = None) -> "Instance":
        return Instance(self.server_count, tuple(tuple(nb) for nb in requests), self.d, self.k,
                        self.label if label is None else label)


@dataclass(frozen=True)
class MatchingOutcome:
    """Result of one run of an online algorithm.

    ``assignment[r]`` is the server matched to request r or ``UNMATCHED``.
    """

    assignment: tuple[int, ...]
    server_matched: tuple[bool, ...]
    matched_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "matched_count", sum(1 for s in self.assignment if s != UNMATCHED))

    @classmethod
    def from_assignment(cls, assignment: Sequence[int], server_count: int) -> "MatchingOutcome":
        flags = [False] * server_count
        for s in assignment:
            if s != UNMATCHED:
                flags[s] = True
        return cls(tuple(assignment), tuple(flags))


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    message: str


def validate_instance(inst: Instance) -> list[Violation]:
    """Return every violated instance invariant (empty list iff valid)."""
    out: list[Violation] = []
    for r, nb in enumerate(inst.requests):
        if len(nb) == 0:
            out.append(Violation("empty_request", r, f"request {r} has no neighbors"))
        if len(nb) > inst.d:
            out.append(Violation("request_degree", r, f"request {r} has degree {len(nb)} > d={inst.d}"))
        if len(set(nb)) != len(nb):
            out.append(Violation("duplicate_neighbor", r, f"request {r} lists a server twice"))
        for s in nb:
            if not 0 <= s < inst.server_count:
                out.append(Violation("server_index", r, f"request {r} names server {s} outside [0, {inst.server_count})"))
    for s, deg in enumerate(inst.server_degrees()):
        if deg < inst.k:
            out.append(Violation("server_degree", s, f"server {s} has degree {deg} < k={inst.k}"))
    return out


def offline_optimum(inst: Instance) -> int:
    """Maximum matching size (Hopcroft-Karp)."""
    n_r = inst.request_count
    adj = [list(dict.fromkeys(nb)) for nb in inst.requests]
    match_r = [UNMATCHED] * n_r
    match_s = [UNMATCHED] * inst.server_count
    inf = n_r + 1

    def bfs(dist):
        q = deque()
        for r in range(n_r):
            if match_r[r] == UNMATCHED:
                dist[r] = 0
                q.append(r)
            else:
                dist[r] = inf
        found = False
        while q:
            r = q.popleft()
            for s in adj[r]:
                r2 = match_s[s]
                if r2 == UNMATCHED:
                    found = True
                elif dist[r2] == inf:
                    dist[r2] = dist[r] + 1
                    q.append(r2)
        return found

    def dfs(r, dist):
        # iterative DFS along the BFS layering
        stack = [(r, iter(adj[r]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for s in it:
                r2 = match_s[s]
                if r2 == UNMATCHED:
                    path.append((u, s))
                    for pu, ps in path:
                        match_r[pu] = ps
                        match_s[ps] = pu
                    return True
                if dist[r2] == dist[u] + 1:
                    path.append((u, s))
                    stack.append((r2, iter(adj[r2])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = inf
                stack.pop()
                if path:
                    path.pop()
        return False

    size = 0
    dist = [0] * n_r
    while bfs(dist):
        for r in range(n_r):
            if match_r[r] == UNMATCHED and dfs(r, dist):
                size += 1
    return size


def check_outcome(inst: Instance, out: MatchingOutcome) -> list[str]:
    """Problems with ``out`` as an outcome on ``inst``; empty when consistent."""
    issues = []
    if len(out.assignment) != inst.request_count:
        issues.append("assignment length differs from request count")
    if len(out.server_matched) != inst.server_count:
        issues.append("server_matched length differs from server count")
    used = [s for s in out.assignment if s != UNMATCHED]
    if len(used) != len(set(used)):
        issues.append("a server is matched twice")
    for r, s in enumerate(out.assignment):
        if s != UNMATCHED and s not in inst.requests[r]:
            issues.append(f"request {r} matched to non-neighbor {s}")
    if out.matched_count != len(used) or out.matched_count != sum(out.server_matched):
        issues.append("matched_count inconsistent")
    if set(used) != {s for s, m in enumerate(out.server_matched) if m}:
        issues.append("server_matched flags disagree with assignment")
    return issues


def canonical_form(inst: Instance) -> tuple:
    """Invariant under server relabeling with the arrival order fixed.

    The sorted multiset of per-server incidence tuples determines the instance
    up to a server permutation, so two instances are isomorphic iff their
    canonical forms are equal.
    """
    return (inst.request_count, tuple(sorted(tuple(rs) for rs in inst.incidence())))


def relabel_servers(inst: Instance, perm: Sequence[int], label: str | None = None) -> Instance:
    """Rename server s to ``perm[s]``."""
    reqs = tuple(tuple(sorted(perm[s] for s in nb)) for nb in inst.requests)
    return inst.with_requests(reqs, label)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "label": inst.label,
        "d": inst.d,
        "k": inst.k,
        "server_count": inst.server_count,
        "requests": [list(nb) for nb in inst.requests],
    }


def instance_from_dict(obj: dict) -> Instance:
    try:
        return Instance(
            server_count=int(obj["server_count"]),
            requests=tuple(tuple(int(s) for s in nb) for nb in obj["requests"]),
            d=int(obj["d"]),
            k=int(obj["k"]),
            label=str(obj.get("label", "")),
        )
    except KeyError as exc:
        raise ValueError(f"instance document is missing field {exc}") from None


def dump_instance(inst: Instance, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh)
        fh.write("\n")


def load_instance(path: str | PathLike) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def iter_edges(inst: Instance) -> Iterable[tuple[int, int]]:
    for r, nb in enumerate(inst.requests):
        for s in nb:
            yield r, s
