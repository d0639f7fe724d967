import json
import math
import subprocess
import sys

import pytest

from volmax import acceptance, cli
from volmax.data import parse_report, read_report
from volmax.solvers import Solution


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _record(out):
    return dict(line.split(",", 1) for line in out.strip().splitlines()[1:])


# ------------------------------------------------------------------ solve

def test_solve_tightness_three(capsys):
    code, out, err = run(capsys, "solve", "--dataset", "tightness", "--k", "3")
    assert code == 0
    rec = _record(out)
    assert rec["ids"] == "0 1 2"
    assert float(rec["log_volume"]) == pytest.approx(math.log(3), rel=1e-12)
    assert "wall_time" in err


def test_solve_json_local_search_beats_greedy(capsys):
    base = ("solve", "--dataset", "sphere", "--n", "100", "--d", "10", "--k", "5", "--format", "json")
    _, g, _ = run(capsys, *base)
    code, ls, _ = run(capsys, *base, "--algorithm", "local-search", "--epsilon", "0.1")
    assert code == 0
    g, ls = json.loads(g), json.loads(ls)
    assert ls["log_volume"] >= g["log_volume"]
    assert isinstance(ls["swaps"], int) and g["swaps"] is None


def test_solve_csv_dataset(tmp_path, capsys):
    path = tmp_path / "pts.csv"
    path.write_text("a,b\n3,0\n0,2\n1,1\n")
    code, out, _ = run(capsys, "solve", "--dataset", str(path), "--k", "2")
    assert code == 0 and _record(out)["ids"] == "0 1"


@pytest.mark.parametrize("argv", [
    ("solve", "--k", "0"),
    ("solve",),
    ("bogus",),
    ("fig1", "--k-grid", "a,b"),
    ("fig1", "--reps", "0"),
    ("fig2", "--dataset", "tightness"),
])
def test_usage_errors_exit_one(capsys, argv):
    assert run(capsys, *argv)[0] == cli.EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ("solve", "--dataset", "/nonexistent.csv", "--k", "2"),
    ("solve", "--k", "200"),
    ("solve", "--k", "2", "--algorithm", "local-search", "--epsilon", "0"),
])
def test_runtime_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == cli.EXIT_RUNTIME


# ------------------------------------------------------------- experiments

def test_fig1_trivial_parts(capsys):
    code, out, _ = run(capsys, "fig1", "--m", "1", "--reps", "1", "--d", "12",
                       "--part-size", "6", "--k-grid", "6")
    assert code == 0
    (row,) = parse_report(out, "csv")
    assert row.measured_ratio == 1.0 and row.k == 6


def test_fig1_small_grid_within_bound(tmp_path, capsys):
    path = tmp_path / "fig1.json"
    code, _, _ = run(capsys, "fig1", "--m", "2", "--reps", "2", "--d", "30", "--part-size", "200",
                     "--k-grid", "1,2,4,8", "--format", "json", "--out", str(path))
    assert code == 0
    rows = read_report(path)
    assert [r.k for r in rows] == [1, 2, 4, 8]
    assert rows[0].measured_ratio == 1.0
    assert all(1.0 <= r.measured_ratio <= r.bound for r in rows)
    assert all(r.wall_time == 0.0 and r.mapper == "greedy" for r in rows)


def test_fig2_endpoints(capsys):
    code, out, _ = run(capsys, "fig2", "--m", "1", "--reps", "1", "--k-grid", "1,150,300")
    assert code == 0
    rows = {r.k: r for r in parse_report(out, "csv")}
    assert rows[1].measured_ratio == 1.0
    assert rows[300].measured_ratio == 1.0
    assert 1.0 <= rows[150].measured_ratio <= 1 + math.sqrt(150)


def test_fig3_grid_shape(capsys):
    code, out, _ = run(capsys, "fig3", "--m", "1", "--reps", "1", "--d", "20")
    assert code == 0
    rows = parse_report(out, "csv")
    assert len(rows) == 32
    assert {(r.k, r.part_size) for r in rows} == {(k, n) for k in (5, 10, 15, 20)
                                                   for n in range(500, 4001, 500)}
    assert all(r.measured_ratio <= r.bound for r in rows)


def test_fig3_part_size_equal_to_k(capsys):
    code, out, _ = run(capsys, "fig3", "--m", "2", "--reps", "1", "--d", "8",
                       "--sizes", "5", "--k-grid", "5")
    assert code == 0 and parse_report(out, "csv")[0].measured_ratio == 1.0


def test_fig_with_epsilon_uses_local_search(capsys):
    code, out, _ = run(capsys, "fig1", "--m", "1", "--reps", "1", "--d", "10", "--part-size", "40",
                       "--k-grid", "3", "--epsilon", "0.05")
    (row,) = parse_report(out, "csv")
    assert code == 0 and row.mapper == "local_search(0.05)"
    assert row.measured_ratio < 1.05


def test_timing_flag_fills_wall_time(capsys):
    _, out, _ = run(capsys, "fig1", "--m", "1", "--reps", "1", "--d", "10", "--part-size", "40",
                    "--k-grid", "3", "--timing")
    assert parse_report(out, "csv")[0].wall_time > 0


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_reruns_are_byte_identical(tmp_path, fmt):
    outputs = []
    for i in range(2):
        path = tmp_path / f"{i}.{fmt}"
        argv = ["fig1", "--m", "3", "--reps", "2", "--d", "16", "--part-size", "60",
                "--k-grid", "2,4", "--format", fmt, "--out", str(path)]
        assert cli.main(argv, quiet=True) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_worker_threads_do_not_change_output(monkeypatch, capsys):
    argv = ("fig1", "--m", "4", "--reps", "1", "--d", "12", "--part-size", "50", "--k-grid", "2,5")
    _, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("VOLMAX_WORKERS", "4")
    _, threaded, _ = run(capsys, *argv)
    assert serial == threaded


# ------------------------------------------------------------------ verify

def test_verify_passes(monkeypatch, capsys):
    monkeypatch.setattr(acceptance, "CRITERIA", [(acceptance.check_tightness, "fast")])
    code, out, _ = run(capsys, "verify")
    assert code == cli.EXIT_OK
    assert "[PASS] 1." in out and "1/1 criteria passed" in out


def test_verify_detects_injected_fault(monkeypatch, capsys):
    # a "greedy" that returns the optimal set hides the sqrt(k) gap
    def wrong_greedy(points, k):
        return Solution.from_indices(points, range(points.n - k, points.n))

    monkeypatch.setattr(acceptance, "greedy", wrong_greedy)
    monkeypatch.setattr(acceptance, "CRITERIA", [(acceptance.check_tightness, "fast")])
    code, out, _ = run(capsys, "verify")
    assert code == cli.EXIT_VERIFY
    assert "[FAIL] 1." in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "volmax", "solve", "--dataset", "tightness", "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "ids,0 1" in proc.stdout
