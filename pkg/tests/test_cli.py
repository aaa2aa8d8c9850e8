import json
import subprocess
import sys

import pytest

from artin_tower.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    lines = out.strip().splitlines()
    header = lines[0].split("\t")
    return [dict(zip(header, line.split("\t"))) for line in lines[1:]]


def test_table_p2(capsys):
    code, out, _ = run(capsys, "--p", "2", "--max-level", "2")
    assert code == 0
    got = [(r["N_i"], r["M_i"], r["O(c_i)"], r["O(a_i)"]) for r in rows(out)]
    assert got == [("3", "3", "3", "3"), ("5", "5", "15", "5"), ("17", "17", "85", "85")]
    assert out.splitlines()[0] == "i\tN_i\tfactorization\tM_i\tO(c_i)\tO(a_i)\tM_i==N_i\tcertainty"


def test_table_empty(capsys):
    code, out, _ = run(capsys, "table", "--p", "2", "--max-level", "-1")
    assert code == 0
    assert rows(out) == []


def test_table_p3(capsys):
    code, out, _ = run(capsys, "--p", "3", "--max-level", "1")
    assert code == 0
    r0 = rows(out)[0]
    assert r0["M_i"] == r0["O(c_i)"] == r0["O(a_i)"] == "13"


def test_table_budget_gap_exit3(capsys, tmp_path):
    code, out, _ = run(capsys, "--p", "7", "--max-level", "1", "--budget-iterations", "1",
                       "--cache", str(tmp_path / "none.txt"))
    assert code == 3
    r1 = rows(out)[1]
    assert r1["factorization"].endswith("?")
    assert r1["M_i"] == "?"


@pytest.mark.parametrize("p", ["4", "1", "9"])
def test_bad_prime(capsys, p):
    code, _, err = run(capsys, "--p", p)
    assert code == 2
    assert "p must be prime" in err


def test_unsupported_prime(capsys):
    code, _, err = run(capsys, "--p", "11")
    assert code == 2


def test_verify_p2(capsys):
    code, out, _ = run(capsys, "verify", "--p", "2", "--max-level", "4")
    assert code == 0
    assert "FAIL" not in out
    assert "PASS\tO(c_i)=O(a_i) exception at i=1 confirmed" in out


def test_verify_p3_json(capsys):
    code, out, _ = run(capsys, "--format", "json", "verify", "--p", "3", "--max-level", "2")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"config", "rows", "checks"}
    assert all(c["status"] == "PASS" for c in doc["checks"])
    assert all({"name", "paper_ref", "status"} <= set(c) for c in doc["checks"])
    for row in doc["rows"]:
        for v in row.values():
            assert isinstance(v, str)
    assert doc["rows"][2]["M_i"] == "387440173"


def test_verify_failure_exit1(capsys, monkeypatch):
    from artin_tower import verify

    real = verify.full_suite

    def broken(*a, **k):
        reports, results = real(*a, **k)
        results[0] = verify.CheckResult(results[0].level, results[0].name, results[0].statement, "FAIL", "x")
        return reports, results

    monkeypatch.setattr(verify, "full_suite", broken)
    code, out, _ = run(capsys, "verify", "--p", "5", "--max-level", "0")
    assert code == 1
    assert "FAIL" in out


def test_json_table(capsys):
    code, out, _ = run(capsys, "--p", "2", "--max-level", "5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    last = doc["rows"][-1]
    assert last["M_i"] == "4294967297"
    assert last["O(c_i)"] == str(3 * 5 * 17 * 257 * 65537 * 4294967297 // 3)
    assert doc["config"]["p"] == "2"
    assert doc["checks"] == []


def test_reruns_identical(capsys):
    a = run(capsys, "verify", "--p", "3", "--max-level", "1", "--seed", "5")
    b = run(capsys, "verify", "--p", "3", "--max-level", "1", "--seed", "5")
    assert a == b
    c = run(capsys, "--p", "2", "--max-level", "4", "--format", "json")
    d = run(capsys, "--p", "2", "--max-level", "4", "--format", "json")
    assert c == d


def test_minpoly_c1(capsys):
    code, out, _ = run(capsys, "--p", "2", "minpoly", "c", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "X^4 + X + 1"
    assert lines[-1] == "EQUAL"
    code, out, _ = run(capsys, "--p", "3", "minpoly", "c", "1")
    assert out.splitlines()[0] == "X^9 + X^6 + X^4 + X^2 + 2X + 2"
    assert out.splitlines()[-1] == "EQUAL"


def test_minpoly_c0_p3(capsys):
    code, out, _ = run(capsys, "--p", "3", "minpoly", "c", "0")
    assert code == 0
    assert out.strip() == "X^3 + 2X + 2"


def test_minpoly_a_and_json(capsys):
    code, out, _ = run(capsys, "--format", "json", "minpoly", "a", "1", "--p", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["target"] == "a_1"
    assert doc["minpoly"].startswith("X^4")


def test_minpoly_budget_exit3(capsys):
    code, _, err = run(capsys, "--p", "2", "--degree-budget", "8", "minpoly", "c", "3")
    assert code == 3
    assert "budget" in err


def test_factors_export(capsys, tmp_path):
    path = tmp_path / "out.txt"
    code, _, _ = run(capsys, "--p", "2", "--max-level", "5", "factors", "export", str(path))
    assert code == 0
    assert "4294967297 = 641^1 * 6700417^1" in path.read_text()


def test_factors_show(capsys):
    code, out, _ = run(capsys, "--p", "2", "--max-level", "6", "factors", "show")
    assert code == 0
    assert "18446744073709551617 = 274177^1 * 67280421310721^1" in out


def test_factors_import_empty(capsys, tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("")
    code, _, _ = run(capsys, "factors", "import", str(path))
    assert code == 0


def test_factors_import_bad_product(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("# header\n15 = 3^1 * 7^1\n")
    code, _, err = run(capsys, "factors", "import", str(path))
    assert code == 2
    assert "line 2" in err


def test_factors_import_into_cache(capsys, tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("21 = 3^1 * 7^1\n")
    cache = tmp_path / "cache.txt"
    code, _, _ = run(capsys, "--cache", str(cache), "factors", "import", str(src))
    assert code == 0
    assert "21 = 3^1 * 7^1" in cache.read_text()


def test_cache_used_for_table(capsys, tmp_path):
    cache = tmp_path / "cache.txt"
    run(capsys, "--p", "7", "--max-level", "1", "--cache", str(cache), "factors", "export")
    code, out, _ = run(capsys, "--p", "7", "--max-level", "1", "--budget-iterations", "1",
                       "--cache", str(cache))
    assert code == 0
    assert "?" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artin_tower", "--p", "2", "--max-level", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[2].split("\t")[4] == "15"
