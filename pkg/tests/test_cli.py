import subprocess
import sys

import pytest

from relframe import cli


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse(capsys):
    code, out, _ = run(capsys, "parse", "A o B", "--desugar")
    assert code == 0
    assert out.splitlines()[:2] == ["A o B", "B ; A"]


def test_parse_error_is_usage(capsys):
    code, _, err = run(capsys, "parse", "A +")
    assert code == 2 and "cannot parse" in err


def test_validate_invalid_prints_witness(capsys):
    code, out, _ = run(capsys, "validate", "--frame", "k4", "--pred", "reflection1")
    assert code == 1
    assert "INVALID" in out and "witness: A={a} B={a} C={a*} D={a*}" in out


def test_validate_valid(capsys):
    code, out, _ = run(capsys, "validate", "--frame", "k1", "--pred", "A -> A")
    assert code == 0 and out.startswith("VALID")


def test_validate_budget(capsys):
    code, out, _ = run(capsys, "validate", "--frame", "k5", "--pred", "M''", "--budget", "20")
    assert code == 3 and out.startswith("BUDGET")


def test_validate_all(capsys):
    code, out, _ = run(capsys, "validate", "--frame", "k2", "--pred", "mp", "--all", "--empty",
                       "--strategy", "singletons")
    assert code == 1 and "2 invalidating" in out


def test_frame_file(tmp_path, capsys):
    path = tmp_path / "f.txt"
    path.write_text("frame z2\nelements 2\ntriples\n0 0 0\n0 1 1\n1 0 1\n1 1 0\nend\n")
    code, out, _ = run(capsys, "frame-check", str(path), "--format", "tsv")
    assert code == 0 and "RA-frame\tyes" in out
    code, _, _ = run(capsys, "frame-check", str(path), "--condition", "dense")
    assert code == 1


def test_missing_frame(capsys):
    code, _, err = run(capsys, "frame-table", "no-such-file")
    assert code == 2 and "error" in err


def test_frame_table_and_builtins(capsys):
    code, out, _ = run(capsys, "frame-table", "k4")
    assert code == 0 and "star: 0->0 a->a* a*->a" in out
    code, out, _ = run(capsys, "frame-builtin")
    assert out.split() == ["k1", "k2", "k3", "k4", "k5"]


def test_axioms(capsys):
    code, out, _ = run(capsys, "axioms", "k1", "--axiom", "R4")
    assert code == 1 and "no" in out
    code, out, _ = run(capsys, "axioms", "k2")
    assert code == 0 and "commutative" in out


def test_basis_and_diamond(capsys):
    assert run(capsys, "basis", "k1", "--dim", "3")[0] == 0
    assert run(capsys, "basis", "k1", "--dim", "4")[0] == 1
    assert run(capsys, "basis", "k4")[0] == 1
    assert run(capsys, "diamond", "k5", "--t", "1")[0] == 0


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--n", "5", "--s", "3", "--format", "tsv")
    assert code == 0 and out.splitlines()[1].split("\t") == ["5", "3", "13", "10", "4"]
    assert run(capsys, "count", "--n", "4", "--s", "1")[0] == 2


def test_census_with_predicate(capsys):
    code, out, _ = run(capsys, "census", "--n", "3", "--class", "kr", "--check-pred", "reductio")
    assert code == 0 and "invalid reductio: 0" in out


def test_census_needs_extended_for_big_sweeps(capsys):
    code, _, err = run(capsys, "census", "--n", "4", "--class", "kr", "--check-pred", "M''")
    assert code == 3 and "--extended" in err


def test_prove_check(capsys, tmp_path):
    assert run(capsys, "prove-check", "perm", "--builtin")[0] == 0
    bad = tmp_path / "bad.proof"
    bad.write_text("proof bad\nvars 2\npredicate A -> A\n1. |- 0:A -> A:0  axiom\nqed 1\n")
    code, out, _ = run(capsys, "prove-check", str(bad))
    assert code == 1 and out.startswith("ERROR line 1")
    code, out, _ = run(capsys, "prove-check", "self", "--builtin", "--expand", "--no-macros")
    assert code == 0 and "macro" not in out.split("OK")[0]


def test_prove_search(capsys):
    code, out, _ = run(capsys, "prove-search", "|- 0:A -> A:0", "--vars", "2", "--depth", "6")
    assert code == 0 and out.startswith("proof search")
    assert run(capsys, "prove-search", "|- 0:A -> A:0", "--vars", "1", "--depth", "6")[0] == 1
    assert run(capsys, "prove-search", "0:A:0")[0] == 2


def test_translate(capsys):
    code, out, _ = run(capsys, "translate", "v0 A v1", "--to", "J")
    assert code == 0 and out.strip() == "(0, 0, A)"
    code, out, _ = run(capsys, "translate", "forall v0 (v0 A v0)", "--to", "H")
    assert code == 0 and out.startswith("1 ==")
    assert run(capsys, "translate", "exists v2 (v0 A v2 || v2 B v1)", "--to", "J")[0] == 3
    assert run(capsys, "translate", "v0 A v1", "--to", "H")[0] == 2


def test_modelcheck(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("base 2\nrel A: (0,1) (1,1)\n")
    assert run(capsys, "modelcheck", "--structure", str(path), "--formula", "v0 A v1",
               "--assign", "v0=0", "--assign", "v1=1")[0] == 0
    assert run(capsys, "modelcheck", "--structure", str(path), "--formula",
               "forall v0 (v0 A v0)")[0] == 1


def test_reproduce_matching_targets(capsys):
    code, out, _ = run(capsys, "reproduce", "s16-table")
    assert code == 0 and "matches golden" in out


def test_reproduce_s15_reports_the_column_swap(capsys):
    code, out, _ = run(capsys, "reproduce", "s15-grid")
    assert code == 1 and "differs from golden" in out


def test_usage_errors(capsys):
    assert cli.run([]) == 2
    assert cli.run(["census", "--n", "4", "--class", "bogus"]) == 2
    assert cli.run(["--help"]) == 0


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "relframe.cli", "count", "--n", "3", "--s", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "P" in res.stdout
