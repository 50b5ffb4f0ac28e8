import json
import subprocess
import sys

import pytest

from conftest import SAMPLES
from repairqa.cli import main

RULES = str(SAMPLES / "ex1.rules")
FACTS = str(SAMPLES / "ex1.facts")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_query_entailed(capsys):
    code, out, _ = run(capsys, "query", "--rules", RULES, "--data", FACTS, "--pref", "prio-subset", "--query", "? Mammal(a)")
    assert code == 0
    verdict = json.loads(out)
    assert verdict["entailed"] is True and verdict["countermodel"] is None


def test_query_not_entailed(capsys, tmp_path):
    qfile = tmp_path / "q.txt"
    qfile.write_text("? Bird(a)\n")
    code, out, _ = run(capsys, "query", "--rules", RULES, "--data", FACTS, "--query-file", str(qfile))
    assert code == 1
    assert json.loads(out)["countermodel"]["repair"] == ["r1", "r2", "r3", "r4", "r6", "r7"]


def test_weighted_repairs(capsys):
    code, out, _ = run(capsys, "repairs", "--rules", RULES, "--data", FACTS, "--pref", "weight")
    assert code == 0
    lines = [json.loads(line) for line in out.splitlines()]
    assert [line["repair"] for line in lines] == [["r2", "r3", "r4", "r5", "r6", "r7"]]


def test_reference_method_agrees(capsys):
    _, fast, _ = run(capsys, "repairs", "--rules", RULES, "--data", FACTS, "--pref", "card")
    _, ref, _ = run(capsys, "repairs", "--rules", RULES, "--data", FACTS, "--pref", "card", "--method", "reference")
    assert fast == ref and len(fast.splitlines()) == 2


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--rules", RULES)
    report = json.loads(out)
    assert code == 0 and report["r_acyclic"] is True and report["guarded"] is True
    code, out, _ = run(capsys, "analyze", "--rules", RULES, "--format", "text")
    assert "r_acyclic: true" in out


def test_depth_limit_is_an_error(capsys):
    code, out, err = run(
        capsys, "query", "--rules", str(SAMPLES / "cycle.rules"), "--data", str(SAMPLES / "cycle.facts"),
        "--query", "? P(a)",
    )
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "depth-limit-exceeded"


def test_parse_error_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.rules"
    bad.write_text("r1: P(x) -> Q(x).\nr2: P(x) -> \n")
    code, _, err = run(capsys, "analyze", "--rules", str(bad))
    payload = json.loads(err)
    assert code == 2 and payload["error"] == "parse" and payload["line"] >= 2


def test_missing_file_and_bad_preference(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--rules", str(tmp_path / "nope.rules"))
    assert code == 2 and json.loads(err)["error"] == "io"
    rules = tmp_path / "p.rules"
    rules.write_text("r1: P(x) -> Q(x).\nr2: Q(x) -> bottom.\n")
    code, _, err = run(capsys, "repairs", "--rules", str(rules), "--data", FACTS, "--pref", "weight")
    assert code == 2 and json.loads(err)["error"] == "invalid-preference-parameters"


def test_unsafe_query(capsys):
    code, _, err = run(capsys, "query", "--rules", RULES, "--data", FACTS, "--query", "? not Bird(x)")
    assert code == 2 and json.loads(err)["error"] == "unsafe-query"


def test_text_format(capsys):
    code, out, _ = run(capsys, "query", "--rules", RULES, "--data", FACTS, "--query", "? Bird(a)", "--format", "text")
    assert code == 1
    assert out.splitlines()[0] == "not entailed"
    assert "  repair: {r1, r2, r3, r4, r6, r7}" in out


def test_output_is_deterministic():
    cmd = [sys.executable, "-m", "repairqa", "repairs", "--rules", RULES, "--data", FACTS, "--jobs", "3"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first.count(b"\n") == 5


def test_small_bench(capsys):
    code, out, _ = run(
        capsys, "bench", "--facts", "300", "--reliable", "10", "--unreliable", "2", "--baseline-budget", "5"
    )
    rows = json.loads(out)["rows"]
    assert code == 0
    assert [r["kind"] for r in rows] == ["prio-subset", "prio-card", "weight", "subset"]
    assert all(r["status"] == "ok" for r in rows)


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["query", "--rules", RULES, "--data", FACTS])
    assert info.value.code == 2
