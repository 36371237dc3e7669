"""Chain diagnostics and estimation metrics."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


def _autocov(xc: NDArray, lag: int) -> NDArray:
    n = xc.shape[0]
    if lag == 0:
        return np.einsum("ij,ij->j", xc, xc) / n
    return np.einsum("ij,ij->j", xc[: n - lag], xc[lag:]) / n


def ess_columns(draws) -> NDArray:
    """Effective sample size of every column of an ``(N, K)`` array of chains.

    Autocovariances are summed directly, lag by lag, and truncated with
    Geyer's initial positive sequence: consecutive pairs
    ``rho_{2k} + rho_{2k+1}`` are accumulated while they stay positive.
    Columns with zero variance get ESS ``N``.  Results lie in ``(0, N]``.
    """
    x = np.asarray(draws, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    N, K = x.shape
    if N < 2:
        raise ValueError("ESS needs at least 2 draws")
    if not np.all(np.isfinite(x)):
        raise ValueError("chain contains non-finite values")
    xc = x - x.mean(axis=0)
    gamma0 = _autocov(xc, 0)
    ess = np.full(K, float(N))
    active = np.flatnonzero(gamma0 > 0)
    if active.size == 0:
        return ess
    xc = xc[:, active]
    g0 = gamma0[active]
    # running sum of rho_t over t >= 1 for each active column
    rho_sum = np.zeros(active.size)
    live = np.ones(active.size, dtype=bool)
    lag = 0
    while live.any() and 2 * lag + 1 < N:
        cols = np.flatnonzero(live)
        sub = xc[:, cols]
        r0 = 1.0 if lag == 0 else _autocov(sub, 2 * lag) / g0[cols]
        r1 = _autocov(sub, 2 * lag + 1) / g0[cols]
        pair = r0 + r1
        keep = pair > 0
        # pair (rho_0, rho_1) contributes only rho_1 to the sum over t >= 1
        add = r1 if lag == 0 else pair
        rho_sum[cols[keep]] += np.broadcast_to(add, cols.shape)[keep]
        live[cols[~keep]] = False
        lag += 1
    tau = 1.0 + 2.0 * rho_sum
    with np.errstate(divide="ignore"):
        est = np.where(tau > 0, N / tau, float(N))
    ess[active] = np.clip(est, np.finfo(float).tiny, float(N))
    return ess


def effective_sample_size(chain, *, return_flag: bool = False):
    """ESS ``N / (1 + 2 sum_t rho_t)`` of a scalar chain.

    With ``return_flag=True`` returns ``(ess, degenerate)`` where
    ``degenerate`` marks a zero-variance chain (ESS reported as ``N``).
    """
    x = np.asarray(chain, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("ESS needs at least 2 draws")
    value = float(ess_columns(x[:, None])[0])
    if return_flag:
        return value, bool(np.all(x == x[0]))
    return value


def autocorrelation(chain, max_lag: int) -> NDArray:
    x = np.asarray(chain, dtype=float).ravel()
    xc = (x - x.mean())[:, None]
    g0 = _autocov(xc, 0)[0]
    if g0 == 0:
        return np.ones(max_lag + 1)
    return np.array([_autocov(xc, t)[0] / g0 for t in range(max_lag + 1)])


def _pair(estimate, truth):
    A = np.asarray(estimate, dtype=float)
    B = np.asarray(truth, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A, B


def rmse(estimate, truth) -> float:
    """Frobenius norm of the error divided by ``p``."""
    A, B = _pair(estimate, truth)
    return float(np.linalg.norm(A - B, "fro") / A.shape[0])


def mnorm(estimate, truth) -> float:
    """Largest absolute entrywise error."""
    A, B = _pair(estimate, truth)
    return float(np.max(np.abs(A - B)))


def seconds_per_kilo_ess(wall_seconds: float, ess_matrix) -> float:
    """Wall-clock seconds per 1000 effective samples, using the median entrywise ESS."""
    ess = np.asarray(ess_matrix, dtype=float)
    if ess.size == 0:
        raise ValueError("empty ESS array")
    if np.any(ess <= 0):
        raise ValueError("ESS entries must be positive")
    return float(wall_seconds) / float(np.median(ess)) * 1000.0


def median_ess(ess_matrix) -> float:
    """Median ESS over the upper triangle (diagonal included) of a p x p ESS matrix."""
    E = np.asarray(ess_matrix, dtype=float)
    return float(np.median(E[np.triu_indices(E.shape[0])]))
