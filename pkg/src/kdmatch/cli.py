"""Command-line entry point: ``kdmatch <command> ...``.

Exit codes: 0 success, 1 a check failed (violation or table mismatch),
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import analysis, candidate, exact, generators, sim, tables
from .instance import dump_instance, load_instance, validate_instance

FAMILIES = ("general", "small-d", "kd", "two-phase", "cycle", "toy")


class UsageError(Exception):
    pass


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=dflt(0), help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=dflt(1), help="worker threads for simulations")
    p.add_argument("--csv", default=dflt(None), metavar="FILE", help="also write CSV output here")
    p.add_argument("--heavy", action="store_true", default=dflt(False), help="enable long-running cases")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdmatch", description=__doc__.splitlines()[0],
                                     parents=[_global_flags(False)])
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    p = sub.add_parser("gen", parents=common, help="write a generated instance")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int, help="cycle length")
    p.add_argument("--out", required=True)

    p = sub.add_parser("candidate", parents=common, help="tabulate a candidate function")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--function", choices=("optimal", "geometric", "ghhnyz", "constant"), default="optimal")

    p = sub.add_parser("gbound", parents=common, help="certified lower-bound series g_d")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)

    p = sub.add_parser("verify", parents=common, help="check a tabulated candidate (l,f(l) CSV)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--mode", choices=("fast", "exhaustive"), default="exhaustive")

    p = sub.add_parser("bounds", parents=common, help="bound comparison rows")
    p.add_argument("--d-min", type=int, required=True)
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--kd", default="", help="extra (k,d) rows as k1:d1,k2:d2")

    p = sub.add_parser("simulate", parents=common, help="Monte-Carlo estimate of one algorithm")
    p.add_argument("--algo", choices=("ranking", "ocs", "random", "greedy"), required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--candidate", choices=("optimal", "geometric", "ghhnyz", "constant", "semi2"), default="optimal")
    p.add_argument("--trials", type=int, required=True)

    p = sub.add_parser("compare", parents=common, help="several algorithms on shared seeds")
    p.add_argument("--algos", required=True, help="comma list, e.g. ranking,ocs:optimal,greedy")
    p.add_argument("--file", required=True)
    p.add_argument("--trials", type=int, required=True)

    p = sub.add_parser("exact", parents=common, help="exact expectation oracles")
    p.add_argument("--oracle", choices=("ranking", "ocs", "markov", "smalld"), required=True)
    p.add_argument("--file")
    p.add_argument("--d", type=int)
    p.add_argument("--candidate", choices=("optimal", "geometric", "ghhnyz", "constant", "semi2"), default="optimal")
    p.add_argument("--theta", help="comma separated sorted ranks for the markov oracle")

    sub.add_parser("tables", parents=common, help="recompute every reference table and compare")
    return parser



def _write_csv(path: str | None, header: Sequence[str], rows: list[Sequence]) -> None:
    if path is None:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _emit(header: Sequence[str], rows: list[Sequence], path: str | None) -> None:
    print(",".join(header))
    for r in rows:
        print(",".join(str(v) for v in r))
    _write_csv(path, header, rows)


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def cmd_gen(a) -> int:
    fam = a.family
    if fam == "general":
        inst = generators.gen_general_ranking_hard(a.d)
    elif fam == "small-d":
        inst = generators.gen_small_d_ranking_hard(a.d)
    elif fam == "kd":
        if a.k is None:
            raise UsageError("--k is required for the kd family")
        inst = generators.gen_kd_ranking_hard(a.k, a.d)
    elif fam == "two-phase":
        inst = generators.gen_two_phase_adversary(a.d, a.seed)
    elif fam == "cycle":
        if a.n is None:
            raise UsageError("--n is required for the cycle family")
        inst = generators.gen_cycle(a.n)
    else:
        inst = generators.gen_toy()
    dump_instance(inst, a.out)
    print(f"wrote {inst.label}: {inst.server_count} servers, {inst.request_count} requests -> {a.out}")
    return 0


def cmd_candidate(a) -> int:
    f = candidate.make_candidate(a.function, a.d, a.levels)
    _emit(("l", "f(l)"), [(l, repr(v)) for l, v in enumerate(f.values)], a.csv)
    return 0


def cmd_gbound(a) -> int:
    g = candidate.g_bound(a.d, a.levels)
    rows = [(l, repr(v), str(g.certified).lower()) for l, v in enumerate(g.values)]
    _emit(("l", "g(l)", "certified"), rows, a.csv)
    return 0


def _read_candidate_csv(path: str, d: int) -> candidate.CandidateFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["l", "f(l)"]:
        raise UsageError(f"{path}: expected a header 'l,f(l)'")
    vals = {}
    for r in rows[1:]:
        if r:
            vals[int(r[0])] = float(r[1])
    if sorted(vals) != list(range(len(vals))):
        raise UsageError(f"{path}: levels must be 0..L without gaps")
    return candidate.CandidateFunction(d, tuple(vals[l] for l in range(len(vals))), name=Path(path).stem)


def cmd_verify(a) -> int:
    f = _read_candidate_csv(a.file, a.d)
    bad = candidate.verify_candidate(f, a.lmax, a.mode)
    for v in bad:
        print(f"violation m={v.m} seq={v.sequence} lhs={v.lhs!r} rhs={v.rhs!r}")
    print(f"{len(bad)} violation(s) ({a.mode}, d={a.d}, lmax={a.lmax})")
    return 1 if bad else 0


def cmd_bounds(a) -> int:
    if a.d_min < 2 or a.d_max < a.d_min:
        raise UsageError("need 2 <= d-min <= d-max")
    rows = analysis.bounds_table(range(a.d_min, a.d_max + 1))
    header = ("d", "OCS", "RANKING", "DETERMINISTIC", "SODA", "UB")
    out = [(r.d, _fmt(r.ocs_lb), _fmt(r.ranking_ub), _fmt(r.high_degree), _fmt(r.marking_cw18), _fmt(r.general_ub))
           for r in rows]
    _emit(header, out, a.csv)
    if a.kd:
        kd_rows = []
        for item in a.kd.split(","):
            try:
                k, d = (int(x) for x in item.split(":"))
            except ValueError:
                raise UsageError(f"bad --kd item {item!r}; expected k:d") from None
            r = analysis.bounds_table([d], lambda _d, k=k: k)[0]
            kd_rows.append((r.k, r.d, _fmt(r.ocs_lb), _fmt(r.ranking_ub), _fmt(r.high_degree), _fmt(r.marking_cw18)))
        kd_header = ("k", "d", "OCS", "RANKING", "DETERMINISTIC", "SODA")
        print()
        kd_path = None
        if a.csv:
            p = Path(a.csv)
            kd_path = str(p.with_name(p.stem + "_kd" + p.suffix))
        _emit(kd_header, kd_rows, kd_path)
    return 0


def _load(path: str):
    inst = load_instance(path)
    issues = validate_instance(inst)
    if issues:
        raise UsageError(f"{path}: invalid instance: {issues[0].message}")
    return inst


def cmd_simulate(a) -> int:
    inst = _load(a.file)
    spec = sim.AlgoSpec(a.algo, a.candidate if a.algo == "ocs" else None)
    rep = sim.run_trials(inst, spec, a.trials, a.seed, a.threads)
    _emit(("trials", "mean_matched", "opt", "ratio", "stderr"),
          [(rep.trials, repr(rep.mean_matched), rep.opt, repr(rep.ratio_estimate), repr(rep.stderr))], None)
    if a.csv:
        sim.write_reports_csv([rep], a.csv)
    return 0


def cmd_compare(a) -> int:
    inst = _load(a.file)
    specs = [sim.parse_algo(s) for s in a.algos.split(",") if s.strip()]
    try:
        reps = sim.compare(inst, specs, a.trials, a.seed, a.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sim.write_reports_csv(reps, sys.stdout)
    if a.csv:
        sim.write_reports_csv(reps, a.csv)
    return 0


def _frac(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator} = {float(x):.12g}"
    return f"{float(x):.12g}"


def cmd_exact(a) -> int:
    if a.oracle in ("ranking", "ocs"):
        if not a.file:
            raise UsageError(f"--file is required for the {a.oracle} oracle")
        inst = _load(a.file)
        if a.oracle == "ranking":
            res = exact.ranking_exact(inst)
            print(f"expected_matched {_frac(res.expected)}")
            print(f"opt {res.opt}")
            print(f"ratio {_frac(res.ratio)}")
        else:
            spec = sim.AlgoSpec("ocs", a.candidate)
            res = exact.ocs_exact(inst, spec.candidate_for(inst))
            print(f"expected_matched {_frac(res.expected)}")
        return 0
    if a.d is None:
        raise UsageError(f"--d is required for the {a.oracle} oracle")
    if a.oracle == "smalld":
        res = exact.ranking_exact_smalld(a.d, heavy=a.heavy)
        print("p " + " ".join(f"{p.numerator}/{p.denominator}" for p in res.p))
        print(f"ratio {_frac(res.ratio)}")
        return 0
    theta = ([float(t) for t in a.theta.split(",")] if a.theta else [i / a.d for i in range(1, a.d)])
    print(f"expected_matched {_frac(exact.markov_expected_matched(theta, a.d))}")
    return 0


_TITLES = {
    "f_values": "f*_d(l), truncated to 4 places",
    "ocs_small_d": "OCS ratio 1 - 1/f*_d(d), d = 3..10, truncated",
    "ocs_large_d": "OCS ratio for large d, truncated",
    "ranking_small_d": "RANKING ratio on the 2d-component instance, rounded up",
    "eta": "eta(d), rounded up",
    "kd_ocs": "(k,d) OCS lower bound, within 1e-3 after the 0.999 cap",
    "kd_ranking": "(k,d) RANKING upper bound, within 1e-3 after the 0.999 cap",
}


def cmd_tables(a) -> int:
    cells = tables.all_cells(heavy=a.heavy)
    current = None
    for c in cells:
        if c.table != current:
            current = c.table
            print(f"\n[{current}] {_TITLES[current]}")
        mark = "ok" if c.ok else "MISMATCH"
        print(f"  {c.key:<12} {c.shown:<8g} ref {c.reference:<8g} {mark}")
    bad = [c for c in cells if not c.ok]
    print()
    for c in bad:
        print("diff " + c.diff_line())
    print(f"{len(cells) - len(bad)}/{len(cells)} cells reproduced")
    if a.csv:
        _write_csv(a.csv, ("table", "key", "computed", "shown", "reference", "ok"),
                   [(c.table, c.key, repr(c.computed), c.shown, c.reference, c.ok) for c in cells])
    return 1 if bad else 0


COMMANDS = {
    "gen": cmd_gen, "candidate": cmd_candidate, "gbound": cmd_gbound, "verify": cmd_verify,
    "bounds": cmd_bounds, "simulate": cmd_simulate, "compare": cmd_compare, "exact": cmd_exact,
    "tables": cmd_tables,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError, KeyError) as exc:
        print(f"kdmatch {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
