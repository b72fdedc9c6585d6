import csv

import pytest

from kdmatch.cli import main
from kdmatch.instance import load_instance
from kdmatch.sim import read_reports_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("fam,extra", [("general", ["--d", "3"]), ("small-d", ["--d", "2"]), ("kd", ["--k", "4", "--d", "2"]),
                                       ("two-phase", ["--d", "3"]), ("cycle", ["--n", "5"]), ("toy", [])])
def test_gen_writes_loadable_instance(capsys, tmp_path, fam, extra):
    out = tmp_path / "i.json"
    code, text, _ = run(capsys, "gen", "--family", fam, *extra, "--out", str(out))
    assert code == 0 and "wrote" in text
    assert load_instance(out).server_count > 0


def test_gen_missing_parameter(capsys, tmp_path):
    code, _, err = run(capsys, "gen", "--family", "cycle", "--out", str(tmp_path / "x.json"))
    assert code == 2 and "--n" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "nope")[0] == 2
    assert run(capsys, "candidate", "--d", "3")[0] == 2
    assert run(capsys, "candidate", "--d", "1", "--levels", "2")[0] == 2
    assert run(capsys, "bounds", "--d-min", "5", "--d-max", "3")[0] == 2
    assert run(capsys, "simulate", "--algo", "ranking", "--file", "/nonexistent.json", "--trials", "5")[0] == 2


def test_candidate_last_value(capsys, tmp_path):
    path = tmp_path / "f.csv"
    code, text, _ = run(capsys, "candidate", "--d", "10", "--levels", "10", "--csv", str(path))
    assert code == 0
    last = text.strip().splitlines()[-1].split(",")
    assert last[0] == "10" and float(last[1]) == pytest.approx(7.8134, abs=1e-4)
    rows = read_csv(path)
    assert rows[0] == ["l", "f(l)"] and len(rows) == 12


def test_global_flags_before_subcommand(capsys, tmp_path):
    path = tmp_path / "f.csv"
    assert run(capsys, "--csv", str(path), "candidate", "--d", "3", "--levels", "3")[0] == 0
    assert read_csv(path)[-1][0] == "3"


def test_candidate_then_verify_round_trip(capsys, tmp_path):
    path = tmp_path / "f.csv"
    run(capsys, "candidate", "--d", "4", "--levels", "6", "--csv", str(path))
    code, text, _ = run(capsys, "verify", "--d", "4", "--file", str(path), "--lmax", "5")
    assert code == 0 and text.strip().endswith("lmax=5)")
    bad = tmp_path / "bad.csv"
    bad.write_text("l,f(l)\n0,1\n1,1.5000001\n")
    code, text, _ = run(capsys, "verify", "--d", "3", "--file", str(bad), "--lmax", "0")
    assert code == 1 and "violation m=1" in text
    gap = tmp_path / "gap.csv"
    gap.write_text("l,f(l)\n0,1\n2,1.5\n")
    assert run(capsys, "verify", "--d", "3", "--file", str(gap), "--lmax", "0")[0] == 2


def test_gbound(capsys, tmp_path):
    path = tmp_path / "g.csv"
    code, text, _ = run(capsys, "gbound", "--d", "10", "--levels", "10", "--csv", str(path))
    assert code == 0
    rows = read_csv(path)
    assert rows[0] == ["l", "g(l)", "certified"] and rows[-1][2] == "true"
    assert float(rows[-1][1]) <= 7.8134


def test_bounds_csv(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, text, _ = run(capsys, "bounds", "--d-min", "2", "--d-max", "2", "--kd", "4:3,8:7", "--csv", str(path))
    assert code == 0
    rows = read_csv(path)
    assert rows[0] == ["d", "OCS", "RANKING", "DETERMINISTIC", "SODA", "UB"]
    assert float(rows[1][5]) == 0.875
    kd = read_csv(tmp_path / "b_kd.csv")
    assert kd[0] == ["k", "d", "OCS", "RANKING", "DETERMINISTIC", "SODA"]
    assert abs(float(kd[1][2]) - 0.954) <= 1e-3 and abs(float(kd[2][3]) - 0.875) <= 1e-3
    assert run(capsys, "bounds", "--d-min", "2", "--d-max", "2", "--kd", "4-3")[0] == 2


def test_simulate_and_compare(capsys, tmp_path):
    inst = tmp_path / "t.json"
    run(capsys, "gen", "--family", "toy", "--out", str(inst))
    out = tmp_path / "s.csv"
    code, text, _ = run(capsys, "simulate", "--algo", "greedy", "--file", str(inst), "--trials", "500",
                        "--seed", "4", "--csv", str(out))
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "trials,mean_matched,opt,ratio,stderr" and lines[1].startswith("500,2.0,2,1.0,")
    assert read_reports_csv(out)[0].mean_matched == 2.0
    cmp_csv = tmp_path / "c.csv"
    code, text, _ = run(capsys, "compare", "--algos", "ranking,ocs:semi2", "--file", str(inst), "--trials", "300",
                        "--csv", str(cmp_csv))
    assert code == 0
    reps = read_reports_csv(cmp_csv)
    assert [r.algo for r in reps] == ["ranking", "ocs(semi2)"]
    assert text.splitlines()[0].startswith("algo,instance")
    assert run(capsys, "compare", "--algos", "ranking", "--file", str(inst), "--trials", "3")[0] == 2


def test_simulate_is_deterministic(capsys, tmp_path):
    inst = tmp_path / "c.json"
    run(capsys, "gen", "--family", "cycle", "--n", "7", "--out", str(inst))
    args = ("simulate", "--algo", "ocs", "--file", str(inst), "--trials", "2000", "--seed", "8")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_exact_oracles(capsys, tmp_path):
    inst = tmp_path / "g.json"
    run(capsys, "gen", "--family", "general", "--d", "2", "--out", str(inst))
    code, text, _ = run(capsys, "exact", "--oracle", "ranking", "--file", str(inst))
    assert code == 0 and "expected_matched 8/3" in text and "ratio 8/9" in text
    code, text, _ = run(capsys, "exact", "--oracle", "ocs", "--file", str(inst))
    assert code == 0 and text.startswith("expected_matched")
    code, text, _ = run(capsys, "exact", "--oracle", "smalld", "--d", "2")
    assert code == 0 and "ratio 119/144" in text
    code, text, _ = run(capsys, "exact", "--oracle", "markov", "--d", "2", "--theta", "0.5")
    assert code == 0 and text.strip() == "expected_matched 0.75"
    assert run(capsys, "exact", "--oracle", "ranking")[0] == 2
    assert run(capsys, "exact", "--oracle", "markov")[0] == 2


def test_tables_exit_zero_and_idempotent(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, text, _ = run(capsys, "tables", "--csv", str(path))
    assert code == 0
    assert text.strip().endswith("cells reproduced") and "MISMATCH" not in text
    line = next(l for l in text.splitlines() if l.strip().startswith("7 ") and "0.8627" in l)
    assert "ok" in line
    rows = read_csv(path)
    assert rows[0] == ["table", "key", "computed", "shown", "reference", "ok"]
    assert all(r[5] == "True" for r in rows[1:])
    assert run(capsys, "tables")[1] == text


def test_tables_exit_one_on_mismatch(capsys, monkeypatch):
    from kdmatch import tables

    monkeypatch.setitem(tables.REF_ETA, 2, 0.8751)
    code, text, _ = run(capsys, "tables")
    assert code == 1 and "diff eta[2]" in text


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "kdmatch", "exact", "--oracle", "smalld", "--d", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "119/144" in res.stdout
