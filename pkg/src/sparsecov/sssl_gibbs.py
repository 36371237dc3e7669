"""Spike-and-slab (SSSL) baseline sampler.

Off-diagonal prior ``(1 - pi) N(0, nu0_sq) + pi N(0, nu1_sq)`` augmented with
binary slab indicators ``Z``; diagonal prior ``Gamma(1, lam/2)``.  Column
updates reuse the shrinkage sampler's kernel with ``V[j, k]`` set to
``nu1_sq`` or ``nu0_sq`` according to ``Z[j, k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import ClassVar

import numpy as np
from numpy.typing import NDArray

from . import _column
from .rand_dist import make_rng
from .shrinkage_gibbs import (
    ChainState,
    SamplerConfig,
    PosteriorSummary,
    _column_order,
    _run_columns,
    _validate_data,
    drive_chain,
    initial_sigma,
    refresh_precision,
    truncated,
)


@dataclass(frozen=True)
class SsslHyperparams:
    """``pi_mix=None`` resolves to ``min(2 / (p - 1), 0.5)`` once ``p`` is known."""

    nu0_sq: float = 0.02**2
    nu1_sq: float = 1.0
    pi_mix: float | None = None
    lam: float = 1.0
    tau: float = math.inf

    def __post_init__(self):
        if not 0 < self.nu0_sq <= self.nu1_sq:
            raise ValueError("need 0 < nu0_sq <= nu1_sq")
        if self.pi_mix is not None and not 0 < self.pi_mix < 1:
            raise ValueError("pi_mix must lie in (0, 1)")
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    def resolve(self, n: int, p: int) -> "SsslHyperparams":
        if self.pi_mix is not None:
            return self
        return replace(self, pi_mix=min(2.0 / (p - 1), 0.5))


@dataclass
class SsslChainState(ChainState):
    """Chain state with slab indicators ``Z`` (off-diagonal, symmetric, 0/1).

    ``Phi``/``Psi`` are unused by this sampler and left at ones.
    """

    Z: NDArray = None

    array_fields: ClassVar[tuple[str, ...]] = ChainState.array_fields + ("Z",)


def init_sssl_chain(data, hyper: SsslHyperparams | None = None, seed: int = 0) -> SsslChainState:
    """Diagonal sample-variance start with every pair in the slab."""
    X = _validate_data(data)
    n, p = X.shape
    Sigma, degenerate = initial_sigma(X)
    Z = np.ones((p, p))
    np.fill_diagonal(Z, 0.0)
    state = SsslChainState(
        Sigma=Sigma,
        Phi=np.ones((p, p)),
        Psi=np.ones((p, p)),
        S=X.T @ X,
        n=n,
        rng=make_rng(seed),
        degenerate_columns=degenerate,
        Z=Z,
    )
    refresh_precision(state)
    return state


def slab_probability(sigma, hyper: SsslHyperparams) -> NDArray:
    """Posterior probability that ``sigma`` comes from the slab, on the log scale."""
    s2 = np.square(np.asarray(sigma, dtype=float))
    pi = hyper.pi_mix
    with np.errstate(over="ignore"):  # t = inf saturates tanh to 1
        t = (
            math.log(pi) - math.log1p(-pi)
            + 0.5 * math.log(hyper.nu0_sq / hyper.nu1_sq)
            + 0.5 * (1.0 / hyper.nu0_sq - 1.0 / hyper.nu1_sq) * s2
        )
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def sssl_prior_variances(state: SsslChainState, hyper: SsslHyperparams) -> NDArray:
    return np.where(state.Z > 0, hyper.nu1_sq, hyper.nu0_sq)


def sssl_update_indicators(state: SsslChainState, hyper: SsslHyperparams, rng=None) -> SsslChainState:
    h = hyper.resolve(state.n, state.p)
    pi = h.pi_mix
    _column.indicator_pass(
        state.Sigma, state.Z, math.log(pi) - math.log1p(-pi), h.nu0_sq, h.nu1_sq, rng or state.rng
    )
    return state


def _sssl_sweep_once(state, hyper, rng, random_scan):
    refresh_precision(state)
    _run_columns(state, sssl_prior_variances(state, hyper), hyper.lam, _column_order(state, rng, random_scan), rng)
    sssl_update_indicators(state, hyper, rng)


_sweep_raw = truncated(_sssl_sweep_once)


def sssl_sweep(state: SsslChainState, hyper: SsslHyperparams, rng=None, *, random_scan: bool = False) -> SsslChainState:
    """Columns ``0..p-1`` with spike/slab prior variances, then the indicators."""
    return _sweep_raw(state, hyper.resolve(state.n, state.p), rng, random_scan)


def run_sssl_chain(data, hyper: SsslHyperparams | None = None, config: SamplerConfig | None = None) -> PosteriorSummary:
    hyper = hyper or SsslHyperparams()
    config = config or SamplerConfig()
    X = _validate_data(data)
    hyper = hyper.resolve(*X.shape)
    state = init_sssl_chain(X, hyper, config.seed)
    return drive_chain(state, hyper, config, _sweep_raw)
