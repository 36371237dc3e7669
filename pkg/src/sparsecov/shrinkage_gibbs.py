"""Blocked Gibbs sampler for the beta-mixture shrinkage prior on a covariance matrix.

Prior (before restriction to positive definite matrices)::

    sigma_jk | rho_jk ~ N(0, rho_jk / (1 - rho_jk) * tau1_sq),   j < k
    rho_jk            ~ Beta(a, b)
    sigma_jj          ~ Gamma(1, lam / 2)

With ``phi_jk = rho_jk / (1 - rho_jk)`` and an auxiliary ``psi_jk`` every full
conditional is standard: a multivariate normal for the off-diagonal part of a
column, a GIG for its Schur complement, and Gamma/GIG pairs for the local
scales.  The prior variance of ``sigma_jk`` is ``V[j, k] = phi_jk * tau1_sq``;
the column precision adds ``1 / V`` (elementwise) to the likelihood term.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, ClassVar

import numpy as np
from numpy.typing import NDArray

from . import _column
from .diagnostics import ess_columns
from .matrix_core import NotPDError, cholesky, min_max_eigenvalues
from .rand_dist import make_rng

RIDGE = 1e-6
MAX_TRUNCATION_REJECTIONS = 100
# traces above this many bytes are spilled to a temporary .npy memmap
TRACE_MEMORY_LIMIT = 256 * 2**20


class TruncationError(RuntimeError):
    """Eigenvalue truncation rejected too many consecutive sweeps."""


class DegenerateDataWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ShrinkageHyperparams:
    """Hyperparameters of the shrinkage prior.

    ``tau1_sq=None`` means the default ``1 / (n * p**4)``, resolved once the
    data shape is known (:meth:`resolve`).  ``tau=inf`` disables the
    eigenvalue truncation.
    """

    tau1_sq: float | None = None
    a: float = 0.5
    b: float = 0.5
    lam: float = 1.0
    tau: float = math.inf

    def __post_init__(self):
        if self.tau1_sq is not None and not self.tau1_sq > 0:
            raise ValueError("tau1_sq must be positive")
        if not (self.a > 0 and self.b > 0 and self.lam > 0):
            raise ValueError("a, b and lam must be positive")
        if not self.tau > 1:
            raise ValueError("tau must exceed 1 (or be inf)")

    def resolve(self, n: int, p: int) -> "ShrinkageHyperparams":
        if self.tau1_sq is not None:
            return self
        return replace(self, tau1_sq=1.0 / (n * float(p) ** 4))


@dataclass(frozen=True)
class SamplerConfig:
    burn_in: int = 5000
    n_samples: int = 5000
    thin: int = 1
    seed: int = 0
    store_full_chain: bool = False
    random_scan: bool = False

    def __post_init__(self):
        if self.burn_in < 0 or self.n_samples < 0:
            raise ValueError("burn_in and n_samples must be non-negative")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class ChainState:
    """Mutable state of one chain; owned by a single thread.

    ``Omega`` caches ``inv(Sigma)`` and is refreshed at the start of every
    sweep.  ``S = X^T X`` and ``n`` are cached from the data.
    """

    Sigma: NDArray
    Phi: NDArray
    Psi: NDArray
    S: NDArray
    n: int
    rng: np.random.Generator
    Omega: NDArray = field(repr=False, default=None)
    iteration: int = 0
    degenerate_columns: tuple[int, ...] = ()
    chi_clamps: int = 0
    shrinkage_clamps: int = 0
    truncation_rejections: int = 0
    eigen_checks: int = 0

    array_fields: ClassVar[tuple[str, ...]] = ("Sigma", "Phi", "Psi", "Omega")

    @property
    def p(self) -> int:
        return self.Sigma.shape[0]

    def copy(self) -> "ChainState":
        out = replace(self)
        for name in self.array_fields:
            setattr(out, name, getattr(self, name).copy())
        return out


@dataclass
class PosteriorSummary:
    mean: NDArray
    lower95: NDArray
    upper95: NDArray
    ess: NDArray
    wall_seconds: float
    n_kept: int
    chi_clamps: int = 0
    shrinkage_clamps: int = 0
    truncation_rejections: int = 0
    degenerate_columns: tuple[int, ...] = ()
    trace: NDArray | None = None
    """Retained draws of the upper triangle (row-major, diagonal included)."""

    def draws(self) -> NDArray:
        """Retained draws as an ``(n_kept, p, p)`` array (needs ``store_full_chain``)."""
        if self.trace is None:
            raise ValueError("chain was not stored; rerun with store_full_chain=True")
        return unpack_upper(self.trace, self.mean.shape[0])


def unpack_upper(trace: NDArray, p: int) -> NDArray:
    iu = np.triu_indices(p)
    out = np.empty((trace.shape[0], p, p))
    out[:, iu[0], iu[1]] = trace
    out[:, iu[1], iu[0]] = trace
    return out


# --------------------------------------------------------------------------
# state construction


def _validate_data(data) -> NDArray:
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be an n x p matrix")
    n, p = X.shape
    if n < 2 or p < 2:
        raise ValueError(f"need n >= 2 and p >= 2, got n={n}, p={p}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contain non-finite values")
    return X


def initial_sigma(X: NDArray) -> tuple[NDArray, tuple[int, ...]]:
    """``diag(sample variances) + RIDGE * I`` and the indices of constant columns."""
    var = X.var(axis=0, ddof=1)
    # rounding leaves ~1e-31 for a constant column, so test equality directly
    const = np.all(X == X[0], axis=0)
    var[const] = 0.0
    degenerate = tuple(int(j) for j in np.flatnonzero(const))
    if degenerate:
        warnings.warn(
            f"columns {list(degenerate)} have zero variance; initialised at the ridge",
            DegenerateDataWarning,
            stacklevel=3,
        )
    return np.diag(var + RIDGE), degenerate


def refresh_precision(state) -> None:
    """Recompute ``Omega = inv(Sigma)``; raises :class:`NotPDError` if Sigma left the PD cone."""
    L = cholesky(state.Sigma)
    Linv = np.linalg.solve(L, np.eye(L.shape[0]))
    Om = Linv.T @ Linv
    state.Omega = 0.5 * (Om + Om.T)


def init_chain(data, hyper: ShrinkageHyperparams | None = None, seed: int = 0) -> ChainState:
    """Starting state: diagonal sample variances, ``Phi = Psi = 1``."""
    X = _validate_data(data)
    n, p = X.shape
    Sigma, degenerate = initial_sigma(X)
    state = ChainState(
        Sigma=Sigma,
        Phi=np.ones((p, p)),
        Psi=np.ones((p, p)),
        S=X.T @ X,
        n=n,
        rng=make_rng(seed),
        degenerate_columns=degenerate,
    )
    refresh_precision(state)
    return state


# --------------------------------------------------------------------------
# Gibbs steps


def prior_variances(state: ChainState, hyper: ShrinkageHyperparams) -> NDArray:
    """``V = Phi * tau1_sq``, the prior variances of the off-diagonal entries."""
    return state.Phi * hyper.resolve(state.n, state.p).tau1_sq


def _run_columns(state, V, lam, order, rng):
    try:
        state.chi_clamps += _column.column_pass(
            state.Sigma, state.Omega, state.S, V, np.asarray(order, dtype=np.int64),
            float(state.n), float(lam), rng,
        )
    except np.linalg.LinAlgError as exc:
        raise NotPDError(f"column precision lost positive definiteness: {exc}") from exc


def update_column(state: ChainState, j: int, hyper: ShrinkageHyperparams, rng=None) -> ChainState:
    """Redraw ``(sigma_12, sigma_22)`` of column ``j`` (0-based) in place.

    ``u = sigma_12`` is drawn from ``N((B + D^{-1})^{-1} w, (B + D^{-1})^{-1})``
    and then ``v = sigma_22 - u^T inv(Sigma11) u`` from
    ``GIG(1 - n/2, lam, u^T A u - 2 s12^T inv(Sigma11) u + s22)``.
    """
    if not 0 <= j < state.p:
        raise IndexError(f"column {j} out of range")
    _run_columns(state, prior_variances(state, hyper), hyper.lam, [j], rng or state.rng)
    return state


def update_local_shrinkage(state: ChainState, hyper: ShrinkageHyperparams, rng=None) -> ChainState:
    h = hyper.resolve(state.n, state.p)
    state.shrinkage_clamps += _column.local_shrinkage_inplace(
        state.Sigma, state.Phi, state.Psi, float(h.a), float(h.b), float(h.tau1_sq), rng or state.rng
    )
    return state


def enforce_truncation(state, hyper) -> bool:
    """True when Sigma lies in ``{tau^-1 <= eig(Sigma) <= tau}`` (always true for ``tau=inf``)."""
    if math.isinf(hyper.tau):
        return True
    state.eigen_checks += 1
    lo, hi = min_max_eigenvalues(state.Sigma)
    return 1.0 / hyper.tau <= lo and hi <= hyper.tau


def _column_order(state, rng, random_scan):
    if random_scan:
        return rng.permutation(state.p)
    return np.arange(state.p)


def _sweep_once(state: ChainState, hyper: ShrinkageHyperparams, rng, random_scan: bool) -> None:
    refresh_precision(state)
    _run_columns(state, prior_variances(state, hyper), hyper.lam, _column_order(state, rng, random_scan), rng)
    update_local_shrinkage(state, hyper, rng)


def truncated(step: Callable) -> Callable:
    """Wrap a raw sweep with the eigenvalue-truncation rejection loop."""

    def run(state, hyper, rng=None, random_scan=False):
        rng = rng or state.rng
        if math.isinf(hyper.tau):
            step(state, hyper, rng, random_scan)
            state.iteration += 1
            return state
        backup = state.copy()
        for _ in range(MAX_TRUNCATION_REJECTIONS + 1):
            step(state, hyper, rng, random_scan)
            if enforce_truncation(state, hyper):
                state.iteration += 1
                return state
            state.truncation_rejections += 1
            for name in state.array_fields:
                np.copyto(getattr(state, name), getattr(backup, name))
        raise TruncationError(
            f"{MAX_TRUNCATION_REJECTIONS} consecutive sweeps fell outside the eigenvalue "
            f"band [1/{hyper.tau}, {hyper.tau}]"
        )

    return run


_sweep = truncated(_sweep_once)


def sweep(state: ChainState, hyper: ShrinkageHyperparams, rng=None, *, random_scan: bool = False) -> ChainState:
    """One full sweep: columns ``0..p-1`` in order, then all local scales."""
    return _sweep(state, hyper, rng, random_scan)


# --------------------------------------------------------------------------
# chain driver


class _TraceBuffer:
    def __init__(self, n_rows: int, n_cols: int):
        nbytes = n_rows * n_cols * 8
        self._path = None
        if nbytes > TRACE_MEMORY_LIMIT:
            fd, self._path = tempfile.mkstemp(suffix=".npy", prefix="sparsecov-trace-")
            os.close(fd)
            self.array = np.lib.format.open_memmap(self._path, mode="w+", dtype=float, shape=(n_rows, n_cols))
        else:
            self.array = np.empty((n_rows, n_cols))

    def release(self) -> None:
        if self._path is not None:
            del self.array
            os.unlink(self._path)
            self._path = None


def drive_chain(state, hyper, config: SamplerConfig, step: Callable) -> PosteriorSummary:
    """Burn in, retain every ``thin``-th draw, and summarise entrywise."""
    if config.n_samples == 0:
        raise ValueError("n_samples must be positive: a summary of zero draws is undefined")
    p = state.p
    iu = np.triu_indices(p)
    buf = _TraceBuffer(config.n_samples, iu[0].size)
    rng = state.rng
    start = time.perf_counter()
    try:
        for _ in range(config.burn_in):
            step(state, hyper, rng, config.random_scan)
        for i in range(config.n_samples):
            for _ in range(config.thin):
                step(state, hyper, rng, config.random_scan)
            buf.array[i] = state.Sigma[iu]
        refresh_precision(state)  # final PD check
        wall = time.perf_counter() - start

        trace = buf.array
        mean_u = trace.mean(axis=0)
        lo_u, hi_u = np.quantile(trace, [0.025, 0.975], axis=0)
        ess_u = ess_columns(trace)

        def sym(vec):
            M = np.empty((p, p))
            M[iu] = vec
            M[iu[1], iu[0]] = vec
            return M

        summary = PosteriorSummary(
            mean=sym(mean_u),
            lower95=sym(lo_u),
            upper95=sym(hi_u),
            ess=sym(ess_u),
            wall_seconds=wall,
            n_kept=config.n_samples,
            chi_clamps=state.chi_clamps,
            shrinkage_clamps=getattr(state, "shrinkage_clamps", 0),
            truncation_rejections=state.truncation_rejections,
            degenerate_columns=state.degenerate_columns,
            trace=np.array(trace) if config.store_full_chain else None,
        )
    finally:
        buf.release()
    return summary


def run_chain(data, hyper: ShrinkageHyperparams | None = None, config: SamplerConfig | None = None) -> PosteriorSummary:
    """Run the shrinkage sampler on an ``n x p`` data matrix (assumed mean zero)."""
    hyper = hyper or ShrinkageHyperparams()
    config = config or SamplerConfig()
    X = _validate_data(data)
    hyper = hyper.resolve(*X.shape)
    state = init_chain(X, hyper, config.seed)
    return drive_chain(state, hyper, config, _sweep)
