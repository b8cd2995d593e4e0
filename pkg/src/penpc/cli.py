"""Command-line interface: ``penpc {simulate,estimate,evaluate,orient,bench}``.

Exit codes: 0 success, 1 usage, 2 I/O or parse failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .evaluate import confusion, metrics
from .graph import (DirectedGraph, UndirectedGraph, gen_ba_dag, gen_er_dag, read_directed,
                    read_undirected, skeleton_of, write_directed, write_undirected)
from .penreg import PenRegConfig
from .pipeline import (BENCH_FIELDS, METHODS, STANDARD_SETTINGS, RunConfig, Setting, estimate,
                       run_bench, substream, write_rows)
from .simulate import SemSpec, read_data, simulate_sem, write_data
from .skeleton import orient_cpdag, read_sepsets, write_cpdag, write_sepsets

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
OUTDIR_ENV = "PENPC_OUTDIR"

log = logging.getLogger("penpc")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_dir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "."))


def _out(path, name) -> Path:
    p = Path(path) if path else _default_dir() / name
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _alpha(text):
    a = float(text)
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _add_penreg_args(sp):
    g = sp.add_argument_group("penalized regression")
    g.add_argument("--gamma", type=float, default=1.0, help="extended BIC gamma")
    g.add_argument("--n-lambda", type=int, default=100)
    g.add_argument("--lambda-min-ratio", type=float, default=1e-3)
    g.add_argument("--n-tau", type=int, default=10)
    g.add_argument("--tau-min", type=float, default=1e-4)
    g.add_argument("--tau-max", type=float, default=1.0)
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--max-iter", type=int, default=1000)
    g.add_argument("--max-support", type=int, default=None)
    g.add_argument("--jobs", type=int, default=1, help="parallel workers")


def _penreg_config(args) -> PenRegConfig:
    try:
        return PenRegConfig(gamma=args.gamma, n_lambda=args.n_lambda,
                            lambda_min_ratio=args.lambda_min_ratio, n_tau=args.n_tau,
                            tau_min=args.tau_min, tau_max=args.tau_max, tol=args.tol,
                            max_iter=args.max_iter, max_support=args.max_support,
                            n_jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="penpc", description="DAG skeleton estimation by penalized "
                 "neighbourhood selection and modified PC-stable pruning.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate", help="simulate a random DAG and Gaussian SEM data")
    sp.add_argument("--model", choices=["er", "ba"], required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--pE", dest="p_e", type=float, help="ER edge probability")
    sp.add_argument("--e", type=int, help="BA edges proposed per new vertex")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--coef", type=float, default=1.0, help="common SEM edge weight")
    sp.add_argument("--sigma2", type=float, default=1.0, help="noise variance")
    sp.add_argument("--out-data")
    sp.add_argument("--out-graph")

    sp = sub.add_parser("estimate", help="estimate a skeleton from a data CSV")
    sp.add_argument("--data", required=True)
    sp.add_argument("--method", choices=METHODS, default="penpc")
    sp.add_argument("--alpha", type=_alpha, default=0.01)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-level", type=int, default=None)
    sp.add_argument("--out-skeleton")
    sp.add_argument("--out-sepsets")
    sp.add_argument("--out-ggm", help="also write the step-1 graph")
    sp.add_argument("--compact-sepsets", action="store_true",
                    help="write '*' for pairs separated by all remaining vertices")
    _add_penreg_args(sp)

    sp = sub.add_parser("evaluate", help="compare an estimated skeleton with the truth")
    sp.add_argument("--est", required=True, help="undirected edge list (a,b)")
    sp.add_argument("--truth", required=True, help="directed (from,to) or undirected (a,b) edge list")
    sp.add_argument("--p", type=int, help="vertex count (default: inferred)")
    sp.add_argument("--data", help="data CSV to take the vertex count from")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--method")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("orient", help="orient a skeleton into a CPDAG")
    sp.add_argument("--skeleton", required=True)
    sp.add_argument("--sepsets", required=True)
    sp.add_argument("--p", type=int)
    sp.add_argument("--out")

    sp = sub.add_parser("bench", help="run the simulation benchmark grid")
    sp.add_argument("--setting", action="append", default=[],
                    help="model:p:n:param, e.g. er:100:30:0.02 (repeatable)")
    sp.add_argument("--all-settings", action="store_true", help="all simulation settings")
    sp.add_argument("--replicates", type=int, default=20)
    sp.add_argument("--alpha", type=_alpha, nargs="+", default=[0.01])
    sp.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-level", type=int, default=None)
    sp.add_argument("--out-dir")
    _add_penreg_args(sp)
    return ap


# --------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.p < 1 or args.n < 2:
        raise UsageError("need p >= 1 and n >= 2")
    rng = substream(args.seed, 0)
    if args.model == "er":
        if args.p_e is None or not 0 <= args.p_e <= 1:
            raise UsageError("--pE in [0, 1] is required for the ER model")
        dag = gen_er_dag(args.p, args.p_e, rng)
    else:
        if args.e is None or args.e < 1:
            raise UsageError("--e >= 1 is required for the BA model")
        dag = gen_ba_dag(args.p, args.e, rng)
    if args.sigma2 <= 0:
        raise UsageError("--sigma2 must be positive")
    spec = SemSpec(dag, {e: args.coef for e in dag.edges}, args.sigma2)
    data = simulate_sem(spec, args.n, substream(args.seed, 1))
    write_data(data, _out(args.out_data, "data.csv"))
    write_directed(dag, _out(args.out_graph, "dag.csv"))
    print(f"edges: {len(dag.edges)}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    data = _load(read_data, args.data)
    if data.n < 5:
        raise InputError(f"{args.data}: need at least 5 samples, got {data.n}")
    cfg = RunConfig(args.method, args.alpha, args.seed, _penreg_config(args), args.max_level)
    res = estimate(data, cfg)
    write_undirected(res.skeleton, _out(args.out_skeleton, "skeleton.csv"))
    write_sepsets(res.sepsets, _out(args.out_sepsets, "sepsets.csv"), args.compact_sepsets)
    if args.out_ggm and res.ggm is not None:
        write_undirected(res.ggm, _out(args.out_ggm, "ggm.csv"))
    for phase, sec in res.timings.items():
        print(f"time {phase}: {sec:.3f}s")
    print(f"edges: {len(res.skeleton.edges)}")
    return EXIT_OK


def _load(fn, path, *a):
    try:
        return fn(path, *a)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except (ValueError, OSError, csv.Error) as exc:
        raise InputError(str(exc)) from exc


def _read_truth(path):
    with open(path, newline="") as f:
        header = f.readline().strip()
    return read_directed if header.replace(" ", "") == "from,to" else read_undirected


def _max_index(*graphs):
    return max((max(e) for g in graphs for e in g.edges), default=-1)


def cmd_evaluate(args) -> int:
    est = _load(read_undirected, args.est)
    try:
        reader = _read_truth(args.truth)
    except FileNotFoundError:
        raise InputError(f"{args.truth}: no such file") from None
    truth = _load(reader, args.truth)
    if isinstance(truth, DirectedGraph):
        truth = skeleton_of(truth)
    if args.data:
        p = _load(read_data, args.data).p
    else:
        p = args.p if args.p is not None else _max_index(est, truth) + 1
    if _max_index(est, truth) >= p:
        raise ValueError(f"edge lists reference vertices beyond p={p}")
    est, truth = UndirectedGraph(p, est.edges), UndirectedGraph(p, truth.edges)
    extra = {k: getattr(args, k) for k in ("alpha", "method", "seed")}
    rec = metrics(confusion(est, truth), **extra)
    text = json.dumps(rec, indent=2)
    if args.out:
        _out(args.out, "metrics.json").write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_orient(args) -> int:
    skel = _load(read_undirected, args.skeleton)
    p = args.p
    if p is None:
        p = _max_index(skel) + 1
        with open(args.sepsets, newline="") as f:
            for row in list(csv.reader(f))[1:]:
                if row and row[0].strip().isdigit():
                    vals = [int(row[0]), int(row[1])]
                    if row[2].strip() not in ("", "*"):
                        vals += [int(v) for v in row[2].split(";")]
                    p = max(p, max(vals) + 1)
    skel = UndirectedGraph(max(p, 1), skel.edges)
    seps = _load(read_sepsets, args.sepsets, skel.p)
    cpdag = orient_cpdag(skel, seps)
    for msg in cpdag.diagnostics:
        print(msg, file=sys.stderr)
    write_cpdag(cpdag, _out(args.out, "cpdag.csv"))
    print(f"directed: {len(cpdag.directed_edges)} undirected: {len(cpdag.undirected_edges)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        settings = [Setting.parse(s) for s in args.setting]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.all_settings:
        settings += [s for s in STANDARD_SETTINGS if s not in settings]
    if not settings:
        raise UsageError("give --setting at least once or --all-settings")
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    out_dir = Path(args.out_dir) if args.out_dir else _default_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    penreg = _penreg_config(args)
    jobs, penreg.n_jobs = penreg.n_jobs, 1

    def progress(setting, rep):
        log.info("done %s replicate %d", setting.name, rep)

    rows, summary, timings = run_bench(settings, args.replicates, args.alpha, args.seed,
                                       args.methods, penreg, args.max_level, jobs, progress)
    write_rows(rows, out_dir / "runs.csv", BENCH_FIELDS)
    write_rows(summary, out_dir / "summary.csv",
               ["setting", "method", "alpha", "runs", "mean_tpr", "mean_fpr", "mean_hd"])
    (out_dir / "timings.json").write_text(json.dumps(timings, indent=1) + "\n")
    failures = sum(1 for r in rows if r.get("error"))
    for rec in summary:
        print(f"{rec['setting']:<24} {rec['method']:<9} alpha={rec['alpha']:<8g} "
              f"TPR={rec['mean_tpr']:.4f} FPR={rec['mean_fpr']:.5f} HD={rec['mean_hd']:.2f}")
    if failures:
        print(f"{failures} run(s) failed; see runs.csv", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "evaluate": cmd_evaluate,
            "orient": cmd_orient, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"penpc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"penpc: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"penpc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
