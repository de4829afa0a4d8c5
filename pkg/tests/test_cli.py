import io
import sys
from contextlib import redirect_stdout

import pytest

from dpss.cli import load_items, main, parse_rational
from dpss.rationals import Rational


def run_cli(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


@pytest.fixture
def items_file(tmp_path):
    path = tmp_path / "items.tsv"
    path.write_text("0\t4\n1\t7\n2\t1\n3\t1023\n")
    return str(path)


def test_parse_rational():
    assert parse_rational("3/7") == Rational(3, 7)
    assert parse_rational("5") == Rational(5)
    with pytest.raises(ValueError):
        parse_rational("0.5")


def test_load_items_errors(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("0 4\n")
    with pytest.raises(ValueError):
        load_items(str(bad))
    bad.write_text("0\t4\n0\t5\n")
    with pytest.raises(ValueError):
        load_items(str(bad))
    bad.write_text(f"0\t{1 << 63}\n")
    with pytest.raises(ValueError):
        load_items(str(bad))


def test_query_single_certain_item(tmp_path):
    path = tmp_path / "one.tsv"
    path.write_text("9\t4\n")
    code, out = run_cli(["query", "--file", str(path), "--alpha", "0", "--beta", "4", "--seed", "1"])
    assert code == 0
    lines = out.strip().splitlines()
    assert "9" in lines
    assert lines[-1] == "mu=1/1"


def test_query_reproducible(items_file):
    args = ["query", "--file", items_file, "--alpha", "1/3", "--beta", "7/2", "--seed", "42"]
    assert run_cli(args) == run_cli(args)


def test_query_degenerate_exits_nonzero(items_file, capsys):
    code, _ = run_cli(["query", "--file", items_file, "--alpha", "0", "--beta", "0", "--seed", "1"])
    assert code == 2


def test_query_missing_file():
    code, _ = run_cli(["query", "--file", "/nonexistent", "--alpha", "1", "--beta", "0"])
    assert code == 2


def test_verify_table_suite():
    code, out = run_cli(["verify", "--suite", "table", "--seed", "5"])
    assert code == 0
    assert "# result=pass" in out


def test_verify_sorted_set_suite():
    code, out = run_cli(["verify", "--suite", "sorted-set", "--seed", "5"])
    assert code == 0


def test_verify_samplers_quick_reproducible():
    args = ["verify", "--suite", "samplers", "--seed", "3", "--trials", "4000"]
    a = run_cli(args)
    b = run_cli(args)
    assert a == b
    assert a[0] == 0


def test_verify_pss_quick():
    code, out = run_cli(["verify", "--suite", "pss", "--seed", "3", "--trials", "3000"])
    assert code == 0
    assert out.count("\n") > 300  # marginals + covariance lines


def test_sort_demo_small():
    code, out = run_cli(["sort-demo", "--n", "3", "--max-exponent", "100", "--seed", "7"])
    assert code == 0
    assert "correct,1" in out


def test_sort_demo_reproducible():
    args = ["sort-demo", "--n", "64", "--max-exponent", "4096", "--seed", "11"]
    assert run_cli(args) == run_cli(args)


def test_sort_demo_validation():
    code, _ = run_cli(["sort-demo", "--n", "0", "--seed", "1"])
    assert code == 2
    code, _ = run_cli(["sort-demo", "--n", "10", "--max-exponent", "5", "--seed", "1"])
    assert code == 2


def test_bench_build_runs():
    code, out = run_cli(["bench", "--kind", "build", "--sizes", "500,1000", "--seed", "2"])
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("build,")]
    assert len(lines) == 2


def test_bench_update_runs():
    code, out = run_cli(
        ["bench", "--kind", "update", "--sizes", "600", "--trials", "200", "--seed", "2"]
    )
    assert code == 0
    assert any(l.startswith("update,600,") for l in out.splitlines())


def test_bench_query_runs():
    code, out = run_cli(
        ["bench", "--kind", "query", "--sizes", "600", "--trials", "60", "--seed", "2"]
    )
    assert code == 0
    rows = [l for l in out.splitlines() if l.startswith("query,")]
    assert len(rows) == 7
