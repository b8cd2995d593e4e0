import csv
import json

import numpy as np
import pytest

from conftest import EXAMPLE_DAG, W, X, Y, Z
from penpc.cli import EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from penpc.graph import UndirectedGraph, read_directed, read_undirected, true_ggm_of
from penpc.pipeline import RunConfig, estimate
from penpc.simulate import SemSpec, read_data, simulate_sem, write_data
from penpc.skeleton import read_cpdag


def run(*argv):
    return main([str(a) for a in argv])


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    return path


def test_simulate_er(tmp_path, capsys):
    d, g = tmp_path / "data.csv", tmp_path / "dag.csv"
    assert run("simulate", "--model", "er", "--p", 11, "--n", 100, "--pE", 0.2, "--seed", 1,
               "--out-data", d, "--out-graph", g) == EXIT_OK
    data = read_data(d)
    assert (data.n, data.p) == (100, 11)
    assert d.read_text().splitlines()[0] == ",".join(f"v{k}" for k in range(11))
    dag = read_directed(g, 11)
    assert f"edges: {len(dag.edges)}" in capsys.readouterr().out


def test_simulate_ba_edge_bound(tmp_path):
    g = tmp_path / "dag.csv"
    assert run("simulate", "--model", "ba", "--p", 100, "--n", 10, "--e", 2,
               "--out-data", tmp_path / "x.csv", "--out-graph", g) == EXIT_OK
    assert len(read_directed(g, 100).edges) <= 2 * 99


def test_simulate_no_edges(tmp_path):
    g = tmp_path / "dag.csv"
    assert run("simulate", "--model", "er", "--p", 5, "--n", 10, "--pE", 0,
               "--out-data", tmp_path / "x.csv", "--out-graph", g) == EXIT_OK
    assert g.read_text().splitlines() == ["from,to"]


def test_simulate_default_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PENPC_OUTDIR", str(tmp_path / "out"))
    assert run("simulate", "--model", "er", "--p", 3, "--n", 10, "--pE", 0.5) == EXIT_OK
    assert (tmp_path / "out" / "data.csv").exists() and (tmp_path / "out" / "dag.csv").exists()


def test_simulate_usage_errors(tmp_path):
    assert run("simulate", "--model", "er", "--p", 5, "--n", 10,
               "--out-data", tmp_path / "x.csv", "--out-graph", tmp_path / "g.csv") == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run("simulate", "--model", "tree", "--p", 5, "--n", 10)
    assert exc.value.code == EXIT_USAGE


def test_simulate_deterministic(tmp_path):
    for k in (1, 2):
        run("simulate", "--model", "ba", "--p", 20, "--n", 15, "--e", 1, "--seed", 9,
            "--out-data", tmp_path / f"d{k}.csv", "--out-graph", tmp_path / f"g{k}.csv")
    assert (tmp_path / "d1.csv").read_bytes() == (tmp_path / "d2.csv").read_bytes()
    assert (tmp_path / "g1.csv").read_bytes() == (tmp_path / "g2.csv").read_bytes()


@pytest.mark.parametrize("alpha", ["0", "1", "1.5", "-0.1"])
def test_estimate_alpha_out_of_range(tmp_path, alpha):
    d = tmp_path / "d.csv"
    run("simulate", "--model", "er", "--p", 4, "--n", 20, "--pE", 0.5,
        "--out-data", d, "--out-graph", tmp_path / "g.csv")
    with pytest.raises(SystemExit) as exc:
        run("estimate", "--data", d, "--alpha", alpha)
    assert exc.value.code == EXIT_USAGE


def test_estimate_missing_file(tmp_path):
    assert run("estimate", "--data", tmp_path / "nope.csv") == EXIT_IO


def test_estimate_constant_column(tmp_path):
    d = write_csv(tmp_path / "d.csv", ["v0", "v1"], [[1.0, k] for k in range(10)])
    assert run("estimate", "--data", d, "--out-skeleton", tmp_path / "s.csv",
               "--out-sepsets", tmp_path / "p.csv") == EXIT_NUMERIC


@pytest.mark.parametrize("method", ["penpc", "pcstable", "pen"])
def test_estimate_writes_outputs(tmp_path, capsys, method):
    data = simulate_sem(SemSpec(EXAMPLE_DAG), 500, np.random.default_rng(0))
    write_data(data, tmp_path / "d.csv")
    assert run("estimate", "--data", tmp_path / "d.csv", "--method", method,
               "--out-skeleton", tmp_path / "s.csv", "--out-sepsets", tmp_path / "p.csv") == EXIT_OK
    out = capsys.readouterr().out
    assert "time " in out and "edges: " in out
    skel = read_undirected(tmp_path / "s.csv", 4)
    # the output sepsets cover every missing pair, so orientation runs
    assert run("orient", "--skeleton", tmp_path / "s.csv", "--sepsets", tmp_path / "p.csv",
               "--p", 4, "--out", tmp_path / "c.csv") == EXIT_OK
    cp = read_cpdag(tmp_path / "c.csv", 4)
    assert {tuple(sorted(e)) for e in cp.directed_edges | cp.undirected_edges} == skel.edges


def test_penpc_and_pen_on_example_data():
    skel_hits = ggm_hits = 0
    target = {(X, W), (Z, W), (Y, Z)}
    for seed in range(100):
        data = simulate_sem(SemSpec(EXAMPLE_DAG), 1000, np.random.default_rng(seed))
        skel_hits += estimate(data, RunConfig("penpc", 0.01)).skeleton.edges == target
        ggm = estimate(data, RunConfig("pen", 0.01)).skeleton.edges
        ggm_hits += ggm >= target | {(X, Z)}
    assert skel_hits >= 90
    assert ggm_hits >= 80
    assert true_ggm_of(EXAMPLE_DAG).edges == target | {(X, Z)}


def _eval(tmp_path, capsys, *extra):
    code = run("evaluate", *extra)
    return code, (json.loads(capsys.readouterr().out) if code == EXIT_OK else None)


def test_evaluate_identical(tmp_path, capsys):
    e = write_csv(tmp_path / "e.csv", ["a", "b"], [(0, 1), (1, 2)])
    code, rec = _eval(tmp_path, capsys, "--est", e, "--truth", e)
    assert code == EXIT_OK and rec["hd"] == 0 and rec["tpr"] == 1.0


def test_evaluate_hand_example(tmp_path, capsys):
    e = write_csv(tmp_path / "e.csv", ["a", "b"], [(0, 1), (0, 2)])
    t = write_csv(tmp_path / "t.csv", ["a", "b"], [(0, 1), (1, 2)])
    code, rec = _eval(tmp_path, capsys, "--est", e, "--truth", t, "--alpha", 0.01)
    assert code == EXIT_OK
    assert (rec["hd"], rec["tp"], rec["fp"], rec["tn"], rec["fn"]) == (2, 1, 1, 0, 1)
    assert rec["alpha"] == 0.01
    # a directed truth file is reduced to its skeleton
    t = write_csv(tmp_path / "td.csv", ["from", "to"], [(1, 0), (1, 2)])
    code, rec = _eval(tmp_path, capsys, "--est", e, "--truth", t)
    assert rec["hd"] == 2
    out = tmp_path / "m.json"
    assert run("evaluate", "--est", e, "--truth", t, "--out", out) == EXIT_OK
    assert json.loads(out.read_text())["hd"] == 2


def test_evaluate_exit_codes(tmp_path, capsys):
    e = write_csv(tmp_path / "e.csv", ["a", "b"], [(0, 1), (0, 4)])
    missing = tmp_path / "missing.csv"
    assert run("evaluate", "--est", e, "--truth", missing) == EXIT_IO
    assert run("evaluate", "--est", missing, "--truth", e) == EXIT_IO
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n0,1\n")
    assert run("evaluate", "--est", bad, "--truth", e) == EXIT_IO
    # vertex 4 does not exist when p = 3
    assert run("evaluate", "--est", e, "--truth", e, "--p", 3) == EXIT_NUMERIC
    assert EXIT_IO != EXIT_NUMERIC


def _orient(tmp_path, edges, seps, p):
    s = write_csv(tmp_path / "s.csv", ["a", "b"], edges)
    q = write_csv(tmp_path / "q.csv", ["i", "j", "sep"], seps)
    code = run("orient", "--skeleton", s, "--sepsets", q, "--p", p, "--out", tmp_path / "c.csv")
    return code, (read_cpdag(tmp_path / "c.csv", p) if code == EXIT_OK else None)


def test_orient_files(tmp_path):
    code, cp = _orient(tmp_path, [(X, W), (Z, W)],
                       [(X, Y, ""), (X, Z, ""), (Y, Z, ""), (Y, W, "")], 4)
    assert code == EXIT_OK and cp.directed_edges == {(X, W), (Z, W)}
    code, cp = _orient(tmp_path, [(0, 1), (1, 2)], [(0, 2, "1")], 3)
    assert cp.directed_edges == frozenset() and cp.undirected_edges == {(0, 1), (1, 2)}
    # 0 -> 1 <- 3 is a v-structure, then 1 - 2 follows by rule 1
    code, cp = _orient(tmp_path, [(0, 1), (3, 1), (1, 2)],
                       [(0, 3, ""), (0, 2, "1"), (2, 3, "1")], 4)
    assert cp.directed_edges == {(0, 1), (3, 1), (1, 2)}


def test_orient_unknown_vertex(tmp_path):
    code, _ = _orient(tmp_path, [(0, 1), (1, 2)], [(0, 2, "7")], 3)
    assert code == EXIT_IO


def _bench(out, *extra):
    return run("bench", "--setting", "er:11:100:0.2", "--replicates", 1, "--alpha", 0.01,
               "--seed", 3, "--out-dir", out, "--n-lambda", 20, "--n-tau", 3, *extra)


def test_bench_row_count_and_determinism(tmp_path, capsys):
    assert _bench(tmp_path / "a") == EXIT_OK
    with open(tmp_path / "a" / "runs.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 3 and {r["method"] for r in rows} == {"penpc", "pcstable", "pen"}
    assert all(r["error"] == "" for r in rows)
    with open(tmp_path / "a" / "summary.csv", newline="") as f:
        assert len(list(csv.DictReader(f))) == 3
    assert json.loads((tmp_path / "a" / "timings.json").read_text())
    assert _bench(tmp_path / "b") == EXIT_OK
    for name in ("runs.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bench_grid_size(tmp_path):
    assert run("bench", "--setting", "er:11:100:0.2", "--setting", "ba:11:100:1",
               "--replicates", 2, "--alpha", 0.01, 0.05, "--methods", "pcstable", "penpc",
               "--out-dir", tmp_path, "--n-lambda", 10, "--n-tau", 2) == EXIT_OK
    with open(tmp_path / "runs.csv", newline="") as f:
        assert len(list(csv.DictReader(f))) == 2 * 2 * 2 * 2


def test_bench_usage(tmp_path):
    assert run("bench", "--out-dir", tmp_path) == EXIT_USAGE
    assert run("bench", "--setting", "tree:1:2:3", "--out-dir", tmp_path) == EXIT_USAGE
    assert run("bench", "--setting", "er:5:20:0.2", "--replicates", 0,
               "--out-dir", tmp_path) == EXIT_USAGE
