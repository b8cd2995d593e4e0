"""Gaussian structural-equation data from a DAG."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .graph import DirectedGraph


class DegenerateColumnError(ValueError):
    pass


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("data must be a 2-d array")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SemSpec:
    """Linear SEM ``x_j = sum_k b_jk x_k + eps_j`` with ``eps_j ~ N(0, noise_variance)``.

    ``coefficients`` maps each (parent, child) edge to its weight; when omitted
    every weight is 1.
    """

    dag: DirectedGraph
    coefficients: dict = field(default=None)
    noise_variance: float = 1.0

    def __post_init__(self):
        coef = self.coefficients
        if coef is None:
            coef = {e: 1.0 for e in self.dag.edges}
        coef = {(int(a), int(b)): float(w) for (a, b), w in coef.items()}
        if set(coef) != set(self.dag.edges):
            raise ValueError("coefficient keys must equal the DAG edge set")
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be positive")
        object.__setattr__(self, "coefficients", coef)

    def weight_matrix(self) -> np.ndarray:
        """``B[child, parent] = b``."""
        B = np.zeros((self.dag.p, self.dag.p))
        for (a, b), w in self.coefficients.items():
            B[b, a] = w
        return B


def simulate_sem(spec: SemSpec, n: int, rng: np.random.Generator) -> DataMatrix:
    if n < 1:
        raise ValueError("n must be >= 1")
    p = spec.dag.p
    X = np.empty((n, p))
    sd = np.sqrt(spec.noise_variance)
    noise = rng.standard_normal((n, p)) * sd
    pa = spec.dag.parent_lists()
    for j in spec.dag.topological_order():
        col = noise[:, j].copy()
        for k in pa[j]:
            col += spec.coefficients[(k, j)] * X[:, k]
        X[:, j] = col
    return DataMatrix(X)


def analytic_covariance(spec: SemSpec) -> np.ndarray:
    """Implied covariance ``(I - B)^-1 D (I - B)^-T``."""
    p = spec.dag.p
    inv = np.linalg.inv(np.eye(p) - spec.weight_matrix())
    S = spec.noise_variance * inv @ inv.T
    return (S + S.T) / 2


def standardize(d: DataMatrix) -> DataMatrix:
    """Center each column and scale it to squared norm ``n``."""
    X = d.values
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two samples to standardize")
    Xc = X - X.mean(axis=0)
    norms = np.sqrt((Xc ** 2).sum(axis=0))
    scale = np.abs(X).max(axis=0)
    bad = norms <= 1e-12 * np.maximum(scale, 1.0) * np.sqrt(n)
    if bad.any():
        raise DegenerateColumnError(f"constant column(s): {np.flatnonzero(bad).tolist()}")
    return DataMatrix(Xc * (np.sqrt(n) / norms), standardized=True)


def write_data(d: DataMatrix, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"v{j}" for j in range(d.p)])
        for row in d.values:
            w.writerow([repr(float(x)) for x in row])


def read_data(path) -> DataMatrix:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty data file")
    header = [h.strip() for h in rows[0]]
    if header != [f"v{j}" for j in range(len(header))]:
        raise ValueError(f"{path}: header must be v0,...,v{{p-1}}")
    body = [r for r in rows[1:] if r]
    try:
        values = np.array([[float(x) for x in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if values.ndim != 2 or values.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    if not np.isfinite(values).all():
        raise ValueError(f"{path}: non-finite values")
    return DataMatrix(values)
