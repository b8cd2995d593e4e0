"""Neighborhood selection with the log penalty.

Each variable is regressed on all the others by minimising

    0.5 * ||y - X b||^2 + n * sum_j lam * log(|b_j| + tau)

with cyclic coordinate descent. ``(lam, tau)`` is picked per regression by
extended BIC over a two-dimensional grid, and the estimated Gaussian
graphical model joins ``i`` and ``j`` when either regression keeps the other.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .graph import UndirectedGraph
from .simulate import DataMatrix

ZERO_CUTOFF = 1e-12


@dataclass(frozen=True)
class PenaltyParams:
    lam: float
    tau: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class RegressionFit:
    coefficients: np.ndarray
    support: frozenset
    rss: float
    params: PenaltyParams
    ebic: float = math.nan
    n_iter: int = 0
    converged: bool = True
    # largest single-update objective increase seen (<= 0 up to rounding)
    max_increase: float = 0.0


@dataclass
class PenRegConfig:
    gamma: float = 1.0
    n_lambda: int = 100
    lambda_min_ratio: float = 1e-3
    n_tau: int = 10
    tau_min: float = 1e-4
    tau_max: float = 1.0
    tol: float = 1e-6
    max_iter: int = 1000
    # stop a lambda path once the support exceeds this; None -> min(q, n // 2)
    max_support: int | None = None
    n_jobs: int = 1
    lambda_grid: np.ndarray | None = field(default=None, repr=False)
    tau_grid: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.n_lambda < 1 or self.n_tau < 1:
            raise ValueError("grid sizes must be positive")
        if not (0 < self.tau_min <= self.tau_max):
            raise ValueError("need 0 < tau_min <= tau_max")
        if not 0 < self.lambda_min_ratio <= 1:
            raise ValueError("lambda_min_ratio must lie in (0, 1]")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


def log_penalty(t, params: PenaltyParams):
    return params.lam * np.log(np.asarray(t) + params.tau)


def log_penalty_deriv(t, params: PenaltyParams):
    return params.lam / (np.asarray(t) + params.tau)


def ebic(rss: float, support_size: int, n: int, q: int, gamma: float = 1.0) -> float:
    """Gaussian extended BIC ``n log(rss/n) + s (log n + 2 gamma log q)``."""
    if not rss > 0:
        raise ValueError("rss must be positive (saturated fit)")
    if not 0 <= support_size <= q:
        raise ValueError("support size outside [0, q]")
    return n * math.log(rss / n) + support_size * (math.log(n) + 2.0 * gamma * math.log(q))


# --------------------------------------------------------------------------
# numba kernels


@numba.njit(cache=True, nogil=True)
def _uni_obj(b, z, lam, tau):
    return 0.5 * (b - z) ** 2 + lam * math.log(abs(b) + tau)


@numba.njit(cache=True, nogil=True)
def univariate_solve(z, lam, tau):
    """Global minimiser of ``0.5 (b - z)^2 + lam log(|b| + tau)``.

    Stationary points with ``sign(b) = sign(z)`` solve
    ``b^2 + (tau - |z|) b + (lam - |z| tau) = 0``; the answer is whichever
    of ``0`` and the positive roots has the smallest objective.
    """
    az = abs(z)
    best = 0.0
    best_val = _uni_obj(0.0, az, lam, tau)
    disc = (az + tau) ** 2 - 4.0 * lam
    if disc >= 0.0:
        sq = math.sqrt(disc)
        for r in ((az - tau + sq) * 0.5, (az - tau - sq) * 0.5):
            if r > 0.0:
                v = _uni_obj(r, az, lam, tau)
                if v < best_val:
                    best, best_val = r, v
    return best if z >= 0 else -best


@numba.njit(cache=True, nogil=True)
def zero_threshold(az, tau):
    """Smallest ``lam`` for which the univariate minimiser at ``|z| = az`` is 0."""
    if az <= 0.0:
        return 0.0
    lo, hi = 0.0, 0.25 * (az + tau) ** 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if univariate_solve(az, mid, tau) == 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * hi:
            break
    return hi


@numba.njit(cache=True, nogil=True)
def _cd(Xt, colsq, b, r, n, lam, tau, tol, max_iter):
    """Cyclic coordinate descent, updating ``b`` and residual ``r`` in place.

    Returns (sweeps, converged, max single-update objective increase).
    """
    q = Xt.shape[0]
    max_inc = -np.inf
    for it in range(max_iter):
        max_delta = 0.0
        for j in range(q):
            d = colsq[j]
            if d <= 0.0:
                continue
            old = b[j]
            xr = 0.0
            for k in range(n):
                xr += Xt[j, k] * r[k]
            z = xr / (n * d) + old
            new = univariate_solve(z, lam / d, tau)
            if abs(new) < 1e-12:
                new = 0.0
            if new != old:
                inc = n * d * (0.5 * (new - z) ** 2 - 0.5 * (old - z) ** 2) \
                    + n * lam * (math.log(abs(new) + tau) - math.log(abs(old) + tau))
                if inc > max_inc:
                    max_inc = inc
                diff = new - old
                for k in range(n):
                    r[k] -= diff * Xt[j, k]
                b[j] = new
                if abs(diff) > max_delta:
                    max_delta = abs(diff)
        if max_delta < tol:
            return it + 1, True, max_inc
    return max_iter, False, max_inc


@numba.njit(cache=True, nogil=True)
def _rss(r):
    s = 0.0
    for k in range(r.shape[0]):
        s += r[k] * r[k]
    return s


@numba.njit(cache=True, nogil=True)
def _grid_kernel(y, Xt, colsq, lam_grid, tau_grid, gamma, tol, max_iter, max_support):
    n = y.shape[0]
    q = Xt.shape[0]
    best_b = np.zeros(q)
    best_score = np.inf
    best_s = q + 1
    best_lam = -1.0
    best_tau = -1.0
    best_rss = np.nan
    best_it = 0
    best_conv = True
    yy = _rss(y)
    pen = math.log(n) + 2.0 * gamma * math.log(max(q, 1))
    for ti in range(tau_grid.shape[0]):
        tau = tau_grid[ti]
        b = np.zeros(q)
        r = y.copy()
        for li in range(lam_grid.shape[0]):
            lam = lam_grid[li]
            it, conv, _ = _cd(Xt, colsq, b, r, n, lam, tau, tol, max_iter)
            s = 0
            for j in range(q):
                if b[j] != 0.0:
                    s += 1
            if s > max_support:
                break
            rss = _rss(r)
            if rss <= 1e-12 * yy or rss <= 0.0:
                break
            score = n * math.log(rss / n) + s * pen
            tie = abs(score - best_score) <= 1e-10 * max(1.0, abs(score))
            better = False
            if score < best_score and not tie:
                better = True
            elif tie:
                if s < best_s or (s == best_s and lam > best_lam):
                    better = True
            if better:
                best_score = score
                best_s = s
                best_lam = lam
                best_tau = tau
                best_rss = rss
                best_it = it
                best_conv = conv
                best_b[:] = b
    return best_b, best_score, best_lam, best_tau, best_rss, best_it, best_conv


# --------------------------------------------------------------------------
# python surface


def _check_design(y, X):
    y = np.ascontiguousarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("shape mismatch between y and X")
    if not (np.isfinite(y).all() and np.isfinite(X).all()):
        raise ValueError("non-finite values in regression inputs")
    n = X.shape[0]
    Xt = np.ascontiguousarray(X.T)
    colsq = (Xt ** 2).sum(axis=1) / n
    return y, Xt, colsq


def _make_fit(b, r, params, n, q, gamma, it=0, conv=True, max_inc=0.0):
    b = np.where(np.abs(b) < ZERO_CUTOFF, 0.0, b)
    support = frozenset(np.flatnonzero(b).tolist())
    rss = float(r @ r)
    score = ebic(rss, len(support), n, q, gamma) if rss > 0 and q > 0 else math.nan
    return RegressionFit(b, support, rss, params, score, int(it), bool(conv), float(max_inc))


def coord_descent(y, X, params: PenaltyParams, init=None, tol: float = 1e-6,
                  max_iter: int = 1000, gamma: float = 1.0) -> RegressionFit:
    """Minimise the log-penalised least-squares objective from ``init``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    y, Xt, colsq = _check_design(y, X)
    q, n = Xt.shape
    b = np.zeros(q) if init is None else np.array(init, dtype=float)
    if b.shape != (q,) or not np.isfinite(b).all():
        raise ValueError("init must be a finite vector of length q")
    r = y - Xt.T @ b
    it, conv, max_inc = _cd(Xt, colsq, b, r, n, float(params.lam), float(params.tau),
                            float(tol), int(max_iter))
    # recompute from scratch to avoid drift in the running residual
    r = y - Xt.T @ b
    return _make_fit(b, r, params, n, q, gamma, it, conv, max_inc if q else 0.0)


def objective(y, X, b, params: PenaltyParams) -> float:
    r = np.asarray(y) - np.asarray(X) @ np.asarray(b)
    n = len(r)
    return 0.5 * float(r @ r) + n * float(np.sum(log_penalty(np.abs(b), params)))


def lambda_max(y, X, tau: float) -> float:
    """Smallest lambda whose solution from zero is all-zero at this ``tau``."""
    y, Xt, colsq = _check_design(y, X)
    n = len(y)
    out = 0.0
    for j in range(Xt.shape[0]):
        if colsq[j] <= 0:
            continue
        z = abs(Xt[j] @ y) / (n * colsq[j])
        out = max(out, colsq[j] * zero_threshold(z, tau))
    return out


def default_grids(y, X, config: PenRegConfig):
    tau_grid = config.tau_grid
    if tau_grid is None:
        tau_grid = np.geomspace(config.tau_max, config.tau_min, config.n_tau)
    tau_grid = np.asarray(tau_grid, dtype=float)
    lam_grid = config.lambda_grid
    if lam_grid is None:
        lmax = lambda_max(y, X, float(tau_grid.max()))
        if lmax <= 0:
            lmax = 1e-8
        lam_grid = np.geomspace(lmax, lmax * config.lambda_min_ratio, config.n_lambda)
    lam_grid = -np.sort(-np.asarray(lam_grid, dtype=float))
    return lam_grid, tau_grid


def grid_search_fit(y, X, config: PenRegConfig | None = None, lambda_grid=None,
                    tau_grid=None) -> RegressionFit:
    """Pick ``(lam, tau)`` by extended BIC over a warm-started two-grid search.

    Ties go to the smaller support, then the larger lambda.
    """
    config = config or PenRegConfig()
    if lambda_grid is not None or tau_grid is not None:
        config = PenRegConfig(**{**config.__dict__,
                                 "lambda_grid": lambda_grid if lambda_grid is not None else config.lambda_grid,
                                 "tau_grid": tau_grid if tau_grid is not None else config.tau_grid})
    y_arr, Xt, colsq = _check_design(y, X)
    q, n = Xt.shape
    lam_grid, tau_grid = default_grids(y_arr, Xt.T, config)
    if lam_grid.size == 0 or tau_grid.size == 0:
        raise ValueError("grids must be nonempty")
    if (lam_grid < 0).any() or (tau_grid <= 0).any():
        raise ValueError("lambda grid must be nonnegative and tau grid positive")
    max_support = config.max_support
    if max_support is None:
        max_support = min(q, n // 2)
    b, score, lam, tau, rss, it, conv = _grid_kernel(
        y_arr, Xt, colsq, lam_grid, tau_grid, float(config.gamma), float(config.tol),
        int(config.max_iter), int(max_support))
    if lam < 0:
        # every grid point was truncated: fall back to the empty model
        b = np.zeros(q)
        lam, tau = float(lam_grid[0]), float(tau_grid[0])
    r = y_arr - Xt.T @ b
    return _make_fit(b, r, PenaltyParams(float(lam), float(tau)), n, q, config.gamma, it, conv)


def neighborhood_select(d: DataMatrix, config: PenRegConfig | None = None,
                        return_fits: bool = False):
    """Estimate the GGM by ``p`` penalised regressions joined with the OR rule."""
    config = config or PenRegConfig()
    X = np.asarray(d.values, dtype=float)
    p = X.shape[1]
    if p < 2:
        raise ValueError("need at least two variables")
    if not d.standardized:
        raise ValueError("neighborhood selection expects standardized data")

    def fit_one(i):
        return grid_search_fit(X[:, i], np.delete(X, i, axis=1), config)

    if config.n_jobs > 1:
        with ThreadPoolExecutor(config.n_jobs) as ex:
            fits = list(ex.map(fit_one, range(p)))
    else:
        fits = [fit_one(i) for i in range(p)]

    edges = set()
    for i, fit in enumerate(fits):
        others = [k for k in range(p) if k != i]
        for j in fit.support:
            k = others[j]
            edges.add((min(i, k), max(i, k)))
    g = UndirectedGraph(p, frozenset(edges))
    return (g, fits) if return_fits else g
