"""Gibbs samplers for sparse covariance matrices.

The beta-mixture shrinkage sampler (:func:`run_chain`), a spike-and-slab
baseline (:func:`run_sssl_chain`), chain diagnostics, the simulation
designs, and an LDA pipeline that plugs in the posterior mean.
"""

from .datagen import C2Config, c1_covariance, c2_covariance, sample_gaussian_data
from .diagnostics import effective_sample_size, ess_columns, mnorm, rmse
from .lda import LabeledDataset, LdaModel, classify, fit_lda, loocv_error, select_features
from .matrix_core import NotPDError
from .rand_dist import make_rng, sample_gig
from .shrinkage_gibbs import (
    ChainState,
    PosteriorSummary,
    SamplerConfig,
    ShrinkageHyperparams,
    TruncationError,
    init_chain,
    run_chain,
    sweep,
)
from .sssl_gibbs import SsslHyperparams, init_sssl_chain, run_sssl_chain, sssl_sweep

__all__ = [
    "C2Config", "c1_covariance", "c2_covariance", "sample_gaussian_data",
    "effective_sample_size", "ess_columns", "mnorm", "rmse",
    "LabeledDataset", "LdaModel", "classify", "fit_lda", "loocv_error", "select_features",
    "NotPDError", "make_rng", "sample_gig",
    "ChainState", "PosteriorSummary", "SamplerConfig", "ShrinkageHyperparams", "TruncationError",
    "init_chain", "run_chain", "sweep",
    "SsslHyperparams", "init_sssl_chain", "run_sssl_chain", "sssl_sweep",
]
