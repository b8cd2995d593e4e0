"""Partial correlations and the Fisher-z conditional independence test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg as sla
from scipy.special import ndtri

from .simulate import DataMatrix

RHO_CLAMP = 1.0 - 1e-12
POPULATION_ZERO = 1e-10

DEPENDENT = "dependent"
INDEPENDENT = "independent"


class CollinearityError(np.linalg.LinAlgError):
    pass


class InsufficientSampleError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationMatrix:
    """Correlation matrix plus the sample size behind it.

    ``n=None`` marks an exact (population) matrix; tests on it declare
    independence iff the partial correlation vanishes.
    """

    values: np.ndarray
    n: int | None = None

    def __post_init__(self):
        R = np.asarray(self.values, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError("correlation matrix must be square")
        if not np.allclose(R, R.T, atol=1e-12, rtol=0):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(R), 1.0, atol=1e-10, rtol=0):
            raise ValueError("correlation matrix must have unit diagonal")
        R = (R + R.T) / 2
        np.fill_diagonal(R, 1.0)
        R = np.clip(R, -1.0, 1.0)
        R.setflags(write=False)
        object.__setattr__(self, "values", R)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def population(self) -> bool:
        return self.n is None

    @classmethod
    def from_covariance(cls, S, n: int | None = None) -> "CorrelationMatrix":
        S = np.asarray(S, dtype=float)
        sd = np.sqrt(np.diag(S))
        return cls(S / np.outer(sd, sd), n)

    def permuted(self, perm) -> "CorrelationMatrix":
        """Relabel so that old vertex ``v`` becomes ``perm[v]``."""
        inv = np.argsort(perm)
        return CorrelationMatrix(self.values[np.ix_(inv, inv)], self.n)


def sample_correlation(d: DataMatrix) -> CorrelationMatrix:
    if not d.standardized:
        raise ValueError("sample_correlation expects standardized data")
    if d.n < 2:
        raise ValueError("need n >= 2")
    X = d.values
    return CorrelationMatrix(X.T @ X / d.n, d.n)


def partial_correlation(R: CorrelationMatrix, i: int, j: int, K: Iterable[int] = ()) -> float:
    """``-H_ij / sqrt(H_ii H_jj)`` with ``H`` the inverse of ``R`` on ``{i, j} + K``."""
    K = list(K)
    if i == j:
        raise ValueError("i and j must differ")
    if i in K or j in K:
        raise ValueError("i and j must not belong to the conditioning set")
    M = R.values
    if not K:
        return float(M[i, j])
    idx = [i, j] + K
    sub = M[np.ix_(idx, idx)]
    try:
        c = _cho_factor(sub)
    except np.linalg.LinAlgError:
        raise CollinearityError(f"singular correlation submatrix for {i},{j}|{K}") from None
    # the 2x2 block of the inverse is all that is needed
    e = np.zeros((len(idx), 2))
    e[0, 0] = e[1, 1] = 1.0
    H = _cho_solve(c, e)[:2]
    rho = -H[0, 1] / math.sqrt(H[0, 0] * H[1, 1])
    return float(min(1.0, max(-1.0, rho)))


def _cho_factor(A):
    c = sla.cho_factor(A, lower=True, check_finite=False)
    d = np.diag(c[0])
    if not np.all(d > 1e-10 * np.sqrt(np.abs(np.diag(A)).max())):
        raise np.linalg.LinAlgError("not positive definite")
    return c


def _cho_solve(c, b):
    return sla.cho_solve(c, b, check_finite=False)


def fisher_z(rho: float) -> float:
    """``0.5 log((1 + rho) / (1 - rho))``, with ``rho`` clamped away from +-1."""
    rho = min(RHO_CLAMP, max(-RHO_CLAMP, float(rho)))
    # atanh is the same transform and exactly odd in floating point
    return math.atanh(rho)


def normal_quantile(prob: float) -> float:
    return float(ndtri(prob))


def ci_statistic(R: CorrelationMatrix, n: int, i: int, j: int, K=()) -> float:
    """``sqrt(n - |K| - 3) * |z|``."""
    K = list(K)
    dof = n - len(K) - 3
    if dof < 1:
        raise InsufficientSampleError(f"n - |K| - 3 = {dof} < 1")
    return math.sqrt(dof) * abs(fisher_z(partial_correlation(R, i, j, K)))


def ci_test(R: CorrelationMatrix, n: int | None, i: int, j: int, K=(), alpha: float = 0.05) -> str:
    """Return ``"dependent"`` or ``"independent"`` for ``X_i`` and ``X_j`` given ``X_K``."""
    if n is None:
        n = R.n
    K = list(K)
    if n is None:
        rho = partial_correlation(R, i, j, K)
        return DEPENDENT if abs(rho) > POPULATION_ZERO else INDEPENDENT
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    stat = ci_statistic(R, n, i, j, K)
    return DEPENDENT if stat > normal_quantile(1 - alpha / 2) else INDEPENDENT
