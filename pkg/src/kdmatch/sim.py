"""Monte-Carlo harness: reproducible per-trial seeds, error bars, CSV reports."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Sequence, TextIO

import numpy as np

from .candidate import CandidateFunction, make_candidate
from .engines import ALGOS, run_batch
from .instance import Instance, offline_optimum
from .seeding import trial_seeds

__all__ = [
    "AlgoSpec",
    "SimReport",
    "PairedGap",
    "parse_algo",
    "run_matched",
    "run_trials",
    "compare",
    "paired_gap",
    "CSV_COLUMNS",
    "write_reports_csv",
    "read_reports_csv",
]

CHUNK = 1 << 16
Z95 = 1.959963984540054


@dataclass(frozen=True)
class AlgoSpec:
    """An engine name plus, for ``ocs``, the candidate family."""

    algo: str
    candidate: str | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.algo == "ocs" and self.candidate is None:
            object.__setattr__(self, "candidate", "optimal")

    @property
    def label(self) -> str:
        return f"ocs({self.candidate})" if self.algo == "ocs" else self.algo

    def candidate_for(self, inst: Instance) -> CandidateFunction | None:
        if self.algo != "ocs":
            return None
        return make_candidate(self.candidate, max(inst.d, 2), max(inst.max_server_degree(), 1))


def parse_algo(text: str) -> AlgoSpec:
    """``ranking``, ``ocs``, ``ocs:geometric``, ``ocs(semi2)`` and so on."""
    text = text.strip()
    for sep in (":", "("):
        if sep in text:
            name, cand = text.split(sep, 1)
            return AlgoSpec(name, cand.rstrip(")"))
    return AlgoSpec(text)


@dataclass(frozen=True)
class SimReport:
    algo: str
    instance: str
    trials: int
    mean_matched: float
    stderr: float
    opt: int
    master_seed: int

    @property
    def ratio_estimate(self) -> float:
        return self.mean_matched / self.opt if self.opt else float("nan")

    @property
    def ratio_stderr(self) -> float:
        return self.stderr / self.opt if self.opt else float("nan")

    @property
    def ratio_ci95(self) -> tuple[float, float]:
        h = Z95 * self.ratio_stderr
        return self.ratio_estimate - h, self.ratio_estimate + h

    def hoeffding(self, delta: float = 0.05) -> float:
        """One-sided half width for the ratio; matched counts lie in [0, opt]."""
        return math.sqrt(math.log(1.0 / delta) / (2.0 * self.trials))

    def row(self) -> dict:
        lo, hi = self.ratio_ci95
        return {
            "algo": self.algo, "instance": self.instance, "trials": self.trials,
            "seed": self.master_seed, "mean": self.mean_matched, "stderr": self.stderr,
            "opt": self.opt, "ratio": self.ratio_estimate, "ci_low": lo, "ci_high": hi,
        }


def run_matched(inst: Instance, spec: AlgoSpec, trials: int, master_seed: int, threads: int = 1) -> np.ndarray:
    """Matched count of every trial, in trial order."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    f = spec.candidate_for(inst)
    starts = list(range(0, trials, CHUNK))

    def chunk(a: int) -> np.ndarray:
        seeds = trial_seeds(master_seed, np.arange(a, min(a + CHUNK, trials)))
        return (run_batch(inst, spec.algo, seeds, f) >= 0).sum(axis=1)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(chunk, starts))
    else:
        parts = [chunk(a) for a in starts]
    return np.concatenate(parts)


def _summary(counts: np.ndarray) -> tuple[float, float]:
    n = len(counts)
    s = int(counts.sum())
    ss = int((counts.astype(np.int64) ** 2).sum())
    mean = s / n
    if n < 2:
        return mean, 0.0
    var = (ss - s * s / n) / (n - 1)
    return mean, math.sqrt(max(var, 0.0) / n)


def run_trials(
    inst: Instance,
    spec: AlgoSpec | str,
    trials: int,
    master_seed: int,
    threads: int = 1,
    opt: int | None = None,
) -> SimReport:
    spec = parse_algo(spec) if isinstance(spec, str) else spec
    counts = run_matched(inst, spec, trials, master_seed, threads)
    mean, se = _summary(counts)
    return SimReport(spec.label, inst.label, trials, mean, se,
                     offline_optimum(inst) if opt is None else opt, master_seed)


def compare(inst: Instance, specs: Sequence[AlgoSpec | str], trials: int, master_seed: int,
            threads: int = 1) -> list[SimReport]:
    """Run every spec on the same per-trial seed stream (common random numbers)."""
    if len(specs) < 2:
        raise ValueError("compare needs at least two algorithms")
    opt = offline_optimum(inst)
    return [run_trials(inst, s, trials, master_seed, threads, opt) for s in specs]


@dataclass(frozen=True)
class PairedGap:
    mean: float
    stderr: float
    opt: int

    @property
    def ratio_gap(self) -> float:
        return self.mean / self.opt

    @property
    def ratio_stderr(self) -> float:
        return self.stderr / self.opt


def paired_gap(inst: Instance, a: AlgoSpec | str, b: AlgoSpec | str, trials: int, master_seed: int) -> PairedGap:
    """Mean and standard error of matched(a) - matched(b) under shared seeds."""
    a = parse_algo(a) if isinstance(a, str) else a
    b = parse_algo(b) if isinstance(b, str) else b
    diff = run_matched(inst, a, trials, master_seed) - run_matched(inst, b, trials, master_seed)
    mean, se = _summary(diff)
    return PairedGap(mean, se, offline_optimum(inst))


CSV_COLUMNS = ("algo", "instance", "trials", "seed", "mean", "stderr", "opt", "ratio", "ci_low", "ci_high")


def write_reports_csv(reports: Iterable[SimReport], dest: str | PathLike | TextIO) -> None:
    def _write(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in rep.row().items()})

    if isinstance(dest, io.TextIOBase) or hasattr(dest, "write"):
        _write(dest)
    else:
        with open(dest, "w", newline="") as fh:
            _write(fh)


def read_reports_csv(src: str | PathLike | TextIO) -> list[SimReport]:
    def _read(fh):
        rows = list(csv.DictReader(fh))
        if rows and tuple(rows[0].keys()) != CSV_COLUMNS:
            raise ValueError(f"unexpected columns {tuple(rows[0].keys())}")
        return [
            SimReport(r["algo"], r["instance"], int(r["trials"]), float(r["mean"]),
                      float(r["stderr"]), int(r["opt"]), int(r["seed"]))
            for r in rows
        ]

    if hasattr(src, "read"):
        return _read(src)
    with open(src, newline="") as fh:
        return _read(fh)
