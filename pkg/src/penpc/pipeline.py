"""Estimator front end and the simulation benchmark used by the CLI and scripts."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .citest import CorrelationMatrix, sample_correlation
from .evaluate import confusion, metrics
from .graph import UndirectedGraph, gen_ba_dag, gen_er_dag, skeleton_of
from .penreg import PenRegConfig, neighborhood_select
from .simulate import DataMatrix, SemSpec, simulate_sem, standardize
from .skeleton import SepSetMap, modified_pc_stable, pc_stable

log = logging.getLogger(__name__)

METHODS = ("penpc", "pcstable", "pen")


@dataclass
class RunConfig:
    method: str = "penpc"
    alpha: float = 0.01
    seed: int = 0
    penreg: PenRegConfig = field(default_factory=PenRegConfig)
    max_level: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass
class Estimate:
    skeleton: UndirectedGraph
    sepsets: SepSetMap
    ggm: UndirectedGraph | None = None
    timings: dict = field(default_factory=dict)


def estimate(data: DataMatrix, config: RunConfig) -> Estimate:
    """Run one estimator on (possibly unstandardized) data."""
    timings = {}
    t0 = time.perf_counter()
    d = data if data.standardized else standardize(data)
    R = sample_correlation(d)
    timings["prepare"] = time.perf_counter() - t0

    if config.method == "pcstable":
        t0 = time.perf_counter()
        skel, seps = pc_stable(R, d.n, d.p, config.alpha, config.max_level)
        timings["pcstable"] = time.perf_counter() - t0
        return Estimate(skel, seps, None, timings)

    t0 = time.perf_counter()
    ggm = neighborhood_select(d, config.penreg)
    timings["step1"] = time.perf_counter() - t0
    if config.method == "pen":
        adj = ggm.adjacency_sets()
        seps = SepSetMap(d.p, complement_pairs=[(a, b) for a in range(d.p)
                                                for b in range(a + 1, d.p) if b not in adj[a]])
        return Estimate(ggm, seps, ggm, timings)

    t0 = time.perf_counter()
    skel, seps = modified_pc_stable(ggm, R, d.n, config.alpha, config.max_level)
    timings["step2"] = time.perf_counter() - t0
    return Estimate(skel, seps, ggm, timings)


# --------------------------------------------------------------------------
# benchmark grid


@dataclass(frozen=True)
class Setting:
    model: str  # "er" or "ba"
    p: int
    n: int
    param: float  # edge probability for er, edges per step for ba

    @property
    def name(self) -> str:
        tag = f"pE{self.param:g}" if self.model == "er" else f"e{int(self.param)}"
        return f"{self.model}_p{self.p}_n{self.n}_{tag}"

    @classmethod
    def parse(cls, text: str) -> "Setting":
        """``er:100:30:0.02`` or ``ba:100:30:1``."""
        try:
            model, p, n, param = text.split(":")
            s = cls(model.lower(), int(p), int(n), float(param))
        except ValueError:
            raise ValueError(f"bad setting {text!r}; expected model:p:n:param") from None
        if s.model not in ("er", "ba"):
            raise ValueError(f"unknown graph model {s.model!r}")
        if s.model == "ba" and (s.param != int(s.param) or s.param < 1):
            raise ValueError("BA edges per step must be a positive integer")
        if s.model == "er" and not 0 <= s.param <= 1:
            raise ValueError("ER edge probability must lie in [0, 1]")
        return s


STANDARD_SETTINGS = tuple(
    [Setting("er", 11, 100, 0.2), Setting("ba", 11, 100, 1), Setting("ba", 11, 100, 2)]
    + [Setting("er", 100, 30, pe) for pe in (0.02, 0.03, 0.04, 0.05)]
    + [Setting("ba", 100, 30, e) for e in (1, 2)]
    + [Setting("er", 1000, 300, pe) for pe in (0.002, 0.005, 0.01)]
    + [Setting("ba", 1000, 300, e) for e in (1, 2)]
)


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator derived from a master seed and integer keys."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *keys]))


def simulate_setting(setting: Setting, seed: int, replicate: int, setting_index: int = 0):
    g_rng = substream(seed, setting_index, replicate, 0)
    if setting.model == "er":
        dag = gen_er_dag(setting.p, setting.param, g_rng)
    else:
        dag = gen_ba_dag(setting.p, int(setting.param), g_rng)
    data = simulate_sem(SemSpec(dag), setting.n, substream(seed, setting_index, replicate, 1))
    return dag, data


BENCH_FIELDS = ["setting", "model", "p", "n", "param", "replicate", "method", "alpha",
                "tpr", "fpr", "hd", "tp", "fp", "tn", "fn", "error"]


def _run_replicate(args):
    setting, si, rep, seed, methods, alphas, penreg, max_level = args
    rows, timing = [], {}
    base = dict(setting=setting.name, model=setting.model, p=setting.p, n=setting.n,
                param=setting.param, replicate=rep)
    try:
        dag, data = simulate_setting(setting, seed, rep, si)
        truth = skeleton_of(dag)
        d = standardize(data)
        R = sample_correlation(d)
    except Exception as exc:  # recorded per row, the run continues
        return [dict(base, method=m, alpha=a, error=repr(exc)) for m in methods for a in alphas], timing

    ggm = None
    if "pen" in methods or "penpc" in methods:
        t0 = time.perf_counter()
        try:
            ggm = neighborhood_select(d, penreg)
        except Exception as exc:
            ggm = exc
        timing["step1"] = time.perf_counter() - t0

    for alpha in alphas:
        for m in methods:
            row = dict(base, method=m, alpha=alpha)
            try:
                t0 = time.perf_counter()
                if m == "pcstable":
                    est, _ = pc_stable(R, d.n, d.p, alpha, max_level)
                elif isinstance(ggm, Exception):
                    raise ggm
                elif m == "pen":
                    est = ggm
                else:
                    est, _ = modified_pc_stable(ggm, R, d.n, alpha, max_level)
                timing[(m, alpha)] = time.perf_counter() - t0
                row.update(metrics(confusion(est, truth)))
                row["error"] = ""
            except Exception as exc:
                row["error"] = repr(exc)
            rows.append(row)
    return rows, timing


def run_bench(settings, replicates: int, alphas, seed: int, methods=METHODS,
              penreg: PenRegConfig | None = None, max_level: int | None = None,
              jobs: int = 1, progress=None):
    """Simulate, estimate and score every (setting, replicate, method, alpha).

    Returns ``(rows, summary, timings)``. Rows are ordered deterministically.
    """
    penreg = penreg or PenRegConfig()
    tasks = [(s, si, rep, seed, tuple(methods), tuple(alphas), penreg, max_level)
             for si, s in enumerate(settings) for rep in range(replicates)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_run_replicate, tasks))
    else:
        results = []
        for t in tasks:
            results.append(_run_replicate(t))
            if progress:
                progress(t[0], t[2])
    rows = [r for res, _ in results for r in res]
    timings = [dict(setting=t[0].name, replicate=t[2], **{str(k): v for k, v in tm.items()})
               for t, (_, tm) in zip(tasks, results)]
    return rows, summarize(rows), timings


def summarize(rows) -> list[dict]:
    groups = {}
    for r in rows:
        if r.get("error"):
            continue
        groups.setdefault((r["setting"], r["method"], r["alpha"]), []).append(r)
    out = []
    for (setting, method, alpha), rs in groups.items():
        rec = dict(setting=setting, method=method, alpha=alpha, runs=len(rs))
        for key in ("tpr", "fpr", "hd"):
            vals = [r[key] for r in rs if r.get(key) is not None]
            rec[f"mean_{key}"] = sum(vals) / len(vals) if vals else math.nan
        out.append(rec)
    return out


def write_rows(rows, path, fields) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k, "")) for k in fields})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v
