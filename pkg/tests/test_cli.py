import argparse
import json

import pytest

from tenscol.cli import (
    load_solution,
    main,
    parse_seeds,
    read_trace,
    sensitivity_grid,
    summary_from_traces,
    UsageError,
    write_solution,
)
from tenscol.graph import Coloring, Mode, load_dimacs, validate
from tenscol.instances import complete, edgeless, mycielski
from tenscol.solver import SolverConfig


def test_parse_seeds():
    assert parse_seeds("0..9") == list(range(10))
    assert parse_seeds("1,4,7") == [1, 4, 7]
    assert parse_seeds("0..2,9") == [0, 1, 2, 9]
    for bad in ("", "a", "3..1"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seeds(bad)


def test_solution_round_trip(tmp_path):
    g = complete(3)
    path = write_solution(g, Coloring.of([0, 1, 2]), "gcp", tmp_path / "k3.sol")
    lines = path.read_text().splitlines()
    assert [ln for ln in lines if ln.startswith("v ")] == ["v 1 1", "v 2 2", "v 3 3"]
    c, meta = load_solution(path)
    assert meta["mode"] == "gcp" and meta["k"] == "3"
    assert validate(g, c).conflict_count == 0


def test_ecp_solution_file_revalidates(tmp_path):
    g = edgeless(5)
    path = write_solution(g, Coloring((0, 1, 0, 1, 0), 2), Mode.ECP, tmp_path / "e5.sol")
    c, meta = load_solution(path)
    report = validate(g, c, meta["mode"])
    assert report.equity_violation == 0 and report.legal


def test_load_solution_rejects_gaps(tmp_path):
    p = tmp_path / "bad.sol"
    p.write_text("c k 2\nv 1 1\nv 3 2\n")
    with pytest.raises(ValueError):
        load_solution(p)


def _records(out):
    return [json.loads(line) for line in (out / "summary.jsonl").read_text().splitlines()]


def test_solve_writes_consistent_artifacts(tmp_path, capsys):
    rc = main([
        "solve", "--instance", "builtin:myciel4", "--k", "5", "--seeds", "0..2",
        "--D", "1", "--lam", "0", "--mu", "0", "--rho", "200", "--max-iter", "2000",
        "--trace-stride", "1", "--out", str(tmp_path),
    ])
    assert rc == 0
    (record,) = _records(tmp_path)
    assert record == json.loads(capsys.readouterr().out)
    assert record["sr"] == f"{record['successes']}/3"
    traces = [tmp_path / name for name in record["traces"]]
    recomputed = summary_from_traces(traces)
    for key in ("runs", "successes", "sr", "mean_time_s", "best_fitness", "k", "mode"):
        assert recomputed[key] == record[key]
    trace, footer = read_trace(traces[0])
    assert [r.t for r in trace.records] == list(range(footer["iterations"] + 1))
    assert trace.header["config"]["rho"] == 200.0 and trace.header["prng"]
    c, meta = load_solution(tmp_path / record["solution"])
    assert validate(mycielski(4), c, meta["mode"]).legal


def test_exit_code_unsolved(tmp_path):
    rc = main(["solve", "--instance", "builtin:K4", "--k", "3", "--D", "8", "--max-iter", "500",
               "--out", str(tmp_path)])
    assert rc == 1
    assert _records(tmp_path)[0]["sr"] == "0/1"


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--instance", "builtin:K4", "--k", "3", "--rho", "3"],
        ["solve", "--instance", "builtin:K4"],
        ["solve", "--instance", "missing.col", "--k", "3"],
        ["solve", "--instance", "builtin:nonsense", "--k", "3"],
        ["exact", "--instance", "builtin:myciel5"],
        ["bogus"],
    ],
)
def test_exit_code_usage(argv, tmp_path, monkeypatch):
    monkeypatch.setenv("TENSCOL_OUT_DIR", str(tmp_path))
    assert main(argv) == 2


def test_malformed_dimacs_is_usage_error(tmp_path):
    bad = tmp_path / "bad.col"
    bad.write_text("p edge 3 1\ne 1 9\n")
    assert main(["solve", "--instance", str(bad), "--k", "2", "--out", str(tmp_path)]) == 2


def test_validate_and_exact_verbs(tmp_path, capsys):
    write_solution(complete(3), Coloring.of([0, 0, 1]), "gcp", tmp_path / "x.sol")
    assert main(["validate", "--instance", "builtin:K3", "--solution", str(tmp_path / "x.sol")]) == 1
    assert json.loads(capsys.readouterr().out)["conflicts"] == 1
    assert main(["exact", "--instance", "builtin:myciel3", "--mode", "gcp"]) == 0
    assert json.loads(capsys.readouterr().out)["chromatic_number"] == 4


def test_generate_round_trip(tmp_path):
    path = tmp_path / "m4.col"
    assert main(["generate", "myciel4", "-o", str(path)]) == 0
    g = load_dimacs(path)
    assert (g.n, g.m) == (23, 71)


def test_sensitivity_single_cell_and_empty_grid(tmp_path, capsys):
    base = SolverConfig(k=5, D=1, rho=200.0, max_iter=200)
    rows = sensitivity_grid(mycielski(4), base, [0.0], [0.0], seeds=[0, 1])
    assert len(rows) == 1 and rows[0]["runs"] == 2
    with pytest.raises(UsageError):
        sensitivity_grid(mycielski(4), base, [], [0.0], seeds=[0])
    rc = main(["sensitivity", "--instance", "builtin:myciel4", "--k", "5", "--D", "1", "--rho", "200",
               "--max-iter", "300", "--lam-grid", "0,1e-5", "--mu-grid", "0", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "myciel4_gcp_k5_sensitivity.csv").read_text().count("\n") == 3
    assert main(["sensitivity", "--instance", "builtin:K3", "--k", "3", "--lam-grid", "",
                 "--mu-grid", "0", "--out", str(tmp_path)]) == 2


def test_sweep_verb(tmp_path, capsys):
    rc = main(["sweep", "--instance", "builtin:myciel4", "--seeds", "0,1", "--D", "20",
               "--rho", "200", "--max-iter", "3000", "--out", str(tmp_path)])
    assert rc == 0
    assert _records(tmp_path)[-1]["best_k"] == 5


def test_myciel4_batch_with_defaults(tmp_path):
    assert main(["solve", "--instance", "builtin:myciel4", "--mode", "gcp", "--k", "5",
                 "--seeds", "0..9", "--out", str(tmp_path)]) == 0
    (record,) = _records(tmp_path)
    assert record["successes"] >= 8


@pytest.mark.slow
def test_r250_5_equitable_65_coloring(tmp_path, capsys):
    assert main(["solve", "--instance", "builtin:R250.5", "--mode", "ecp", "--k", "65",
                 "--max-iter", "200000", "--out", str(tmp_path)]) == 0
    (record,) = _records(tmp_path)
    sol = tmp_path / record["solution"]
    assert main(["validate", "--instance", "builtin:R250.5", "--solution", str(sol)]) == 0
    report = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert report == {"conflicts": 0, "equity_violation": 0, "k": 65, "legal": True, "mode": "ecp"}
