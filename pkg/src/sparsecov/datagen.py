"""Synthetic covariance designs and Gaussian data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .matrix_core import cholesky, min_max_eigenvalues
from .rand_dist import make_rng

# (row, col, value), 1-based, upper triangle incl. diagonal; blanks are zero
_C1_ENTRIES = [
    (1, 1, 0.239), (1, 2, 0.117), (1, 8, 0.031),
    (2, 2, 1.554),
    (3, 3, 0.362), (3, 4, 0.002),
    (4, 4, 0.199), (4, 5, 0.094),
    (5, 5, 0.349), (5, 12, -0.036),
    (6, 6, 0.295), (6, 7, -0.229), (6, 8, 0.002),
    (7, 7, 0.715),
    (8, 8, 0.164), (8, 9, 0.112), (8, 10, -0.028), (8, 11, -0.008),
    (9, 9, 0.518), (9, 10, -0.193), (9, 11, -0.090),
    (10, 10, 0.379), (10, 11, 0.167),
    (11, 11, 0.159),
    (12, 12, 0.207),
]

PD_REPAIR_MARGIN = 0.05


def c1_covariance() -> NDArray:
    """The fixed 12 x 12 sparse covariance modelled on exchange-rate returns."""
    M = np.zeros((12, 12))
    for r, c, v in _C1_ENTRIES:
        M[r - 1, c - 1] = v
        M[c - 1, r - 1] = v
    cholesky(M)
    return M


def count_nonzero_offdiag(M) -> int:
    """Number of nonzero entries strictly above the diagonal."""
    M = np.asarray(M)
    return int(np.count_nonzero(M[np.triu_indices(M.shape[0], 1)]))


@dataclass(frozen=True)
class C2Config:
    p: int = 50
    mu: float = 0.02
    sparsity_frac: float = 0.20
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not 0 < self.sparsity_frac < 1:
            raise ValueError("sparsity_frac must lie in (0, 1)")

    @property
    def n_nonzero(self) -> int:
        # round-half-even would turn 0.5 into 0; use half-up on the pair count
        return int(np.floor(self.sparsity_frac * self.p * (self.p - 1) / 2 + 0.5))


def c2_covariance_raw(cfg: C2Config) -> NDArray:
    """Random sparse symmetric matrix before any positive-definiteness repair."""
    rng = make_rng(cfg.seed, 2)
    p = cfg.p
    M = np.diag(rng.standard_gamma(1.0, size=p))
    iu = np.triu_indices(p, 1)
    chosen = rng.choice(iu[0].size, size=cfg.n_nonzero, replace=False)
    vals = rng.uniform(0.0, cfg.mu, size=cfg.n_nonzero)
    rows, cols = iu[0][chosen], iu[1][chosen]
    M[rows, cols] = vals
    M[cols, rows] = vals
    return M


def c2_covariance(cfg: C2Config, *, return_repaired: bool = False):
    """Random-structure design: Gamma(1,1) diagonal, Unif(0, mu) on a random 20% of pairs.

    If the result is not positive definite the diagonal is shifted by
    ``|lambda_min| + 0.05``; the sparsity pattern and the off-diagonal values
    are untouched.  With ``return_repaired=True`` also returns whether the
    shift was applied.
    """
    M = c2_covariance_raw(cfg)
    lo, _ = min_max_eigenvalues(M)
    repaired = lo <= 0
    if repaired:
        M = M + (abs(lo) + PD_REPAIR_MARGIN) * np.eye(cfg.p)
    cholesky(M)
    return (M, repaired) if return_repaired else M


def sample_gaussian_data(Sigma, n: int, seed: int) -> NDArray:
    """``n`` iid rows from ``N(0, Sigma)``."""
    L = cholesky(Sigma)
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed, 1)
    return rng.standard_normal((n, L.shape[0])) @ L.T
