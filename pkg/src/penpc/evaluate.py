"""Skeleton accuracy: confusion counts over vertex pairs, rates, ROC points."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass

from .graph import UndirectedGraph


class UndefinedRateError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(est: UndirectedGraph, truth: UndirectedGraph) -> Confusion:
    if est.p != truth.p:
        raise ValueError(f"vertex counts differ: {est.p} vs {truth.p}")
    pairs = truth.p * (truth.p - 1) // 2
    tp = len(est.edges & truth.edges)
    fp = len(est.edges) - tp
    fn = len(truth.edges) - tp
    return Confusion(tp, fp, pairs - tp - fp - fn, fn)


def tpr(c: Confusion) -> float:
    if c.tp + c.fn == 0:
        raise UndefinedRateError("TPR undefined: truth has no edges")
    return c.tp / (c.tp + c.fn)


def fpr(c: Confusion) -> float:
    if c.fp + c.tn == 0:
        raise UndefinedRateError("FPR undefined: truth is complete")
    return c.fp / (c.fp + c.tn)


def hamming(c: Confusion) -> int:
    return c.fp + c.fn


def metrics(c: Confusion, **extra) -> dict:
    """Flat record with tpr, fpr, hd and the raw counts; undefined rates are None."""
    out = {}
    for name, fn in (("tpr", tpr), ("fpr", fpr)):
        try:
            out[name] = fn(c)
        except UndefinedRateError:
            out[name] = None
    out["hd"] = hamming(c)
    out.update(asdict(c))
    out.update(extra)
    return out


def roc_points(runs) -> list[tuple[float, float]]:
    """Average (fpr, tpr) per alpha over replicates, sorted by fpr."""
    runs = list(runs)
    if not runs:
        raise ValueError("no runs")
    acc = defaultdict(list)
    for alpha, c in runs:
        acc[alpha].append((fpr(c), tpr(c)))
    pts = []
    for alpha in sorted(acc):
        vals = acc[alpha]
        pts.append((sum(v[0] for v in vals) / len(vals), sum(v[1] for v in vals) / len(vals)))
    return sorted(pts)
