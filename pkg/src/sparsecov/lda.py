"""Two-class linear discriminant analysis with a plug-in covariance estimate.

Features are ranked by a two-sample t-statistic; the covariance is estimated
from the class-centred data pooled together, either as the sample covariance
or as the posterior mean of one of the Bayesian samplers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .matrix_core import NotPDError, cholesky, solve_spd
from .rand_dist import make_rng
from .shrinkage_gibbs import SamplerConfig, ShrinkageHyperparams, run_chain
from .sssl_gibbs import SsslHyperparams, run_sssl_chain

ESTIMATORS = ("shrinkage", "sssl", "sample")
SAMPLE_RIDGE = 1e-6


class EmptyClassWarning(UserWarning):
    pass


@dataclass
class LabeledDataset:
    X: NDArray
    labels: NDArray
    feature_names: Sequence[str] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.labels = np.asarray(self.labels).astype(int)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        if self.labels.shape != (self.X.shape[0],):
            raise ValueError("labels must have one entry per row of X")
        if not np.all(np.isin(self.labels, (1, 2))):
            raise ValueError("labels must be 1 or 2")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains non-finite values")
        if self.feature_names is not None and len(self.feature_names) != self.X.shape[1]:
            raise ValueError("feature_names length does not match X")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def class_sizes(self) -> tuple[int, int]:
        return int(np.sum(self.labels == 1)), int(np.sum(self.labels == 2))

    def subset(self, rows=None, cols=None) -> "LabeledDataset":
        rows = slice(None) if rows is None else rows
        X = self.X[rows]
        names = self.feature_names
        if cols is not None:
            X = X[:, cols]
            if names is not None:
                names = [names[c] for c in cols]
        return LabeledDataset(X, self.labels[rows], names)


@dataclass
class LdaModel:
    Sigma_hat: NDArray
    means: tuple[NDArray, NDArray]
    priors: tuple[float, float]
    # Sigma_hat^{-1} mu_j, filled in by fit_lda
    coef: tuple[NDArray, NDArray] = field(default=None, repr=False)

    def __post_init__(self):
        if not math.isclose(self.priors[0] + self.priors[1], 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError("class priors must sum to 1")
        if self.coef is None:
            self.coef = tuple(solve_spd(self.Sigma_hat, m) for m in self.means)


# --------------------------------------------------------------------------
# feature selection


def t_statistics(data: LabeledDataset, *, welch: bool = False) -> NDArray:
    """Two-sample t-statistic per feature (class 1 minus class 2).

    Pooled variance by default; ``welch=True`` uses unpooled variances.
    Features with zero variance in both classes get ``t = 0``.
    """
    n1, n2 = data.class_sizes()
    if n1 < 2 or n2 < 2:
        raise ValueError("each class needs at least 2 samples")
    X1 = data.X[data.labels == 1]
    X2 = data.X[data.labels == 2]
    diff = X1.mean(axis=0) - X2.mean(axis=0)
    v1 = X1.var(axis=0, ddof=1)
    v2 = X2.var(axis=0, ddof=1)
    if welch:
        se2 = v1 / n1 + v2 / n2
    else:
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
        se2 = sp2 * (1.0 / n1 + 1.0 / n2)
    t = np.zeros_like(diff)
    ok = se2 > 0
    t[ok] = diff[ok] / np.sqrt(se2[ok])
    return t


def rank_features(data: LabeledDataset, *, welch: bool = False) -> NDArray:
    """Feature indices by decreasing ``|t|``; ties keep the lower index first."""
    t = np.abs(t_statistics(data, welch=welch))
    return np.argsort(-t, kind="stable")


def select_features(data: LabeledDataset, k: int, *, welch: bool = False) -> LabeledDataset:
    """Keep the ``k`` features with the largest ``|t|`` (in ranked order)."""
    if not 1 <= k <= data.p:
        raise ValueError(f"k must be in [1, {data.p}], got {k}")
    keep = rank_features(data, welch=welch)[:k]
    return data.subset(cols=keep)


# --------------------------------------------------------------------------
# model


def class_centered(data: LabeledDataset) -> NDArray:
    """Rows minus their class mean, pooled over both classes."""
    Xc = data.X.copy()
    for c in (1, 2):
        m = data.labels == c
        Xc[m] -= Xc[m].mean(axis=0)
    return Xc


def pooled_sample_covariance(Xc: NDArray, n_classes: int = 2) -> NDArray:
    n = Xc.shape[0]
    S = Xc.T @ Xc / max(n - n_classes, 1)
    S = 0.5 * (S + S.T)
    try:
        cholesky(S)
    except NotPDError:
        S = S + SAMPLE_RIDGE * np.eye(S.shape[0])
    return S


@dataclass(frozen=True)
class EstimatorSettings:
    """Sampler settings used when the plug-in covariance is Bayesian."""

    sampler: SamplerConfig = field(default_factory=lambda: SamplerConfig(burn_in=1000, n_samples=1000))
    shrinkage: ShrinkageHyperparams = field(default_factory=ShrinkageHyperparams)
    sssl: SsslHyperparams = field(default_factory=SsslHyperparams)


def estimate_covariance(Xc: NDArray, estimator, settings: EstimatorSettings | None = None, seed: int | None = None) -> NDArray:
    """Plug-in covariance from class-centred data.

    ``estimator`` is ``"sample"``, ``"shrinkage"``, ``"sssl"`` or a callable
    mapping the centred matrix to a covariance.
    """
    if callable(estimator):
        return np.asarray(estimator(Xc), dtype=float)
    settings = settings or EstimatorSettings()
    cfg = settings.sampler
    if seed is not None:
        cfg = SamplerConfig(
            burn_in=cfg.burn_in, n_samples=cfg.n_samples, thin=cfg.thin, seed=seed,
            random_scan=cfg.random_scan,
        )
    if estimator == "sample":
        return pooled_sample_covariance(Xc)
    if estimator == "shrinkage":
        return run_chain(Xc, settings.shrinkage, cfg).mean
    if estimator == "sssl":
        return run_sssl_chain(Xc, settings.sssl, cfg).mean
    raise ValueError(f"unknown covariance estimator {estimator!r}; expected one of {ESTIMATORS}")


def fit_lda(data: LabeledDataset, covariance_estimator="sample", settings: EstimatorSettings | None = None, seed: int | None = None) -> LdaModel:
    n1, n2 = data.class_sizes()
    if n1 == 0 or n2 == 0:
        raise ValueError("both classes must be present")
    means = (data.X[data.labels == 1].mean(axis=0), data.X[data.labels == 2].mean(axis=0))
    Sigma = estimate_covariance(class_centered(data), covariance_estimator, settings, seed)
    return LdaModel(Sigma_hat=Sigma, means=means, priors=(n1 / data.n, n2 / data.n))


def discriminant_scores(model: LdaModel, X) -> NDArray:
    """``x^T S^{-1} mu_j - mu_j^T S^{-1} mu_j / 2 + log w_j`` for j = 1, 2; shape (n, 2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.means[0].size:
        raise ValueError(f"expected {model.means[0].size} features, got {X.shape[1]}")
    cols = []
    for mu, b, w in zip(model.means, model.coef, model.priors):
        cols.append(X @ b - 0.5 * mu @ b + math.log(w))
    return np.column_stack(cols)


def classify(model: LdaModel, x) -> int | NDArray:
    """Class 1 or 2 for each row; ties go to class 1."""
    scores = discriminant_scores(model, x)
    out = np.where(scores[:, 0] >= scores[:, 1], 1, 2)
    return int(out[0]) if np.ndim(x) == 1 else out


# --------------------------------------------------------------------------
# cross-validation


def loocv_predictions(
    data: LabeledDataset,
    k_features: int | None,
    covariance_estimator="sample",
    settings: EstimatorSettings | None = None,
    *,
    seed: int = 0,
    full_data_selection: bool = False,
    welch: bool = False,
    map_fn: Callable = map,
) -> NDArray:
    """Held-out prediction for every sample (0 where the fold was skipped).

    Feature ranking is redone inside each fold unless ``full_data_selection``
    is set, which ranks once on all samples (leaks the held-out label).
    """
    if data.n < 3:
        raise ValueError("LOOCV needs at least 3 samples")
    k = data.p if k_features is None else k_features
    global_cols = rank_features(data, welch=welch)[:k] if full_data_selection else None
    jobs = [(data, i, k, covariance_estimator, settings, seed, global_cols, welch) for i in range(data.n)]
    return np.array(list(map_fn(_loocv_fold, jobs)), dtype=int)


def _fold_seed(seed: int, i: int) -> int:
    return int(make_rng(seed, 7, i).integers(2**63))


def _loocv_fold(job) -> int:
    data, i, k, estimator, settings, seed, global_cols, welch = job
    train_rows = np.delete(np.arange(data.n), i)
    train = data.subset(rows=train_rows)
    n1, n2 = train.class_sizes()
    if n1 == 0 or n2 == 0:
        warnings.warn(f"fold {i}: a class is empty after holding out sample {i}; skipped", EmptyClassWarning)
        return 0
    if global_cols is not None:
        cols = global_cols
    elif k < data.p:
        cols = rank_features(train, welch=welch)[:k]
    else:
        cols = np.arange(data.p)
    model = fit_lda(train.subset(cols=cols), estimator, settings, _fold_seed(seed, i))
    return classify(model, data.X[i, cols])


def loocv_error(
    data: LabeledDataset,
    k_features: int | None,
    covariance_estimator="sample",
    settings: EstimatorSettings | None = None,
    **kwargs,
) -> float:
    """Fraction of misclassified held-out samples; skipped folds leave the denominator."""
    pred = loocv_predictions(data, k_features, covariance_estimator, settings, **kwargs)
    done = pred > 0
    if not done.any():
        raise ValueError("every LOOCV fold was skipped")
    return float(np.mean(pred[done] != data.labels[done]))


def planted_dataset(n_per_class: int = 20, p: int = 10, n_signal: int = 3, shift: float = 3.0, seed: int = 0) -> LabeledDataset:
    """Two Gaussian classes that differ by ``shift`` on the first ``n_signal`` features.

    Noise features are AR(1)-correlated (coefficient 0.3) so the covariance
    estimate matters; the classes are well separated.
    """
    rng = make_rng(seed, 11)
    idx = np.arange(p)
    Sigma = 0.3 ** np.abs(idx[:, None] - idx[None, :])
    L = np.linalg.cholesky(Sigma)
    X = rng.standard_normal((2 * n_per_class, p)) @ L.T
    labels = np.repeat([1, 2], n_per_class)
    X[labels == 2, :n_signal] += shift
    names = [f"g{j + 1}" for j in range(p)]
    return LabeledDataset(X, labels, names)
