import json

import pytest

from dfrechet.cli import main
from dfrechet.pointio import parse_points


@pytest.fixture
def worked(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("0,0\n2,0\n")
    b.write_text("0,1\n2,1\n")
    return str(a), str(b)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decide_both(worked, capsys):
    code, out, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1], "--delta", "2.2360679775", "--algo", "both")
    assert code == 0
    assert out.splitlines()[:2] == ["true", "agreement: yes"]


def test_decide_false(worked, capsys):
    code, out, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1], "--delta", "1")
    assert code == 0 and out.splitlines()[0] == "false"


def test_decide_json(worked, capsys):
    code, out, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1], "--delta", "1", "--model", "diagonal", "--format", "json", "--algo", "both")
    d = json.loads(out)
    assert code == 0 and d["result"] is True and d["agreement"] is True


def test_compute(worked, capsys):
    code, out, _ = run(capsys, "compute", "--a", worked[0], "--b", worked[1], "--algo", "both")
    assert code == 0 and out.splitlines()[0] == "2.23606797749979"
    code, out, _ = run(capsys, "compute", "--a", worked[0], "--b", worked[1], "--model", "diagonal")
    assert out.splitlines()[0] == "1.0"
    assert "decide calls" in out


def test_compute_single_points(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text("[[0, 0]]")
    b.write_text("[[3, 4]]")
    code, out, _ = run(capsys, "compute", "--a", str(a), "--b", str(b))
    assert code == 0 and out.splitlines()[0] == "5.0"


def test_malformed_input_exits_1(tmp_path, worked, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0\n1;2\n")
    code, _, err = run(capsys, "decide", "--a", str(bad), "--b", worked[1], "--delta", "1")
    assert code == 1 and "line 2" in err
    code, _, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1])
    assert code == 1
    code, _, _ = run(capsys, "decide", "--a", str(tmp_path / "missing.csv"), "--b", worked[1], "--delta", "1")
    assert code == 1
    code, _, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1], "--delta", "1", "--block-size", "1")
    assert code == 1


def test_env_override(worked, capsys, monkeypatch):
    monkeypatch.setenv("DFRECHET_DECIDE_DELTA", "3")
    code, out, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1])
    assert code == 0 and out.splitlines()[0] == "true"
    code, out, _ = run(capsys, "decide", "--a", worked[0], "--b", worked[1], "--delta", "1")
    assert out.splitlines()[0] == "false"


@pytest.mark.parametrize("kind", ["random-walk", "uniform", "perturbed"])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_gen_random_deterministic(kind, fmt, capsys, tmp_path):
    args = ["gen-random", "--n", "50", "--kind", kind, "--seed", "7", "--format", fmt]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    _, other, _ = run(capsys, *args[:-3], "--seed", "8", "--format", fmt)
    assert other != first
    pts = parse_points(first, fmt)
    assert len(pts) == 50
    out = tmp_path / f"p.{fmt}"
    run(capsys, *args, "--out", str(out))
    assert out.read_text() == first


def test_gen_lowerbound_and_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-lowerbound", "--m", "3", "--subset", "1,3")
    d = json.loads(out)
    assert code == 0 and d["m"] == 3 and d["subset"] == [1, 3] and len(d["B"]) == 5
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "gen-lowerbound", "--m", "3", "--part", "A", "--format", "csv", "--out", str(a))
    run(capsys, "gen-lowerbound", "--m", "3", "--part", "B", "--subset", "1,3", "--format", "csv", "--out", str(b))
    code, out, _ = run(capsys, "decide", "--a", str(a), "--b", str(b), "--delta", "1", "--algo", "both")
    assert code == 0 and "agreement: yes" in out
    code, _, _ = run(capsys, "gen-lowerbound", "--m", "3", "--part", "B")
    assert code == 1
    code, _, _ = run(capsys, "gen-lowerbound", "--m", "0")
    assert code == 1


def test_verify_lowerbound(capsys):
    code, out, _ = run(capsys, "verify-lowerbound", "--m", "4", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["ok"] and d["distinct_states"] == 16
    code, _, _ = run(capsys, "verify-lowerbound", "--m", "13")
    assert code == 1


def test_bench_walks_schema(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "8..10", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["family"] == "random-walk"
    rows = d["rows"]
    assert [r["n"] for r in rows] == [256, 512, 1024]
    for r in rows:
        assert set(r) == {"n", "m", "naive_ms", "fast_ms", "ratio", "answer", "agree", "params"}
        assert r["agree"] is True and r["answer"] is True


def test_bench_lowerbound_counts(capsys):
    code, out, _ = run(capsys, "bench", "--family", "lowerbound", "--sizes", "2..10", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert [r["states"] for r in rows] == [2**m for m in range(2, 11)]
    code, out, _ = run(capsys, "bench", "--family", "lowerbound", "--sizes", "2..3")
    assert out.startswith("| m ")


def test_bench_bad_sizes(capsys):
    code, _, _ = run(capsys, "bench", "--sizes", "x..y")
    assert code == 1
