import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsecov.lda import (
    ESTIMATORS,
    EmptyClassWarning,
    EstimatorSettings,
    LabeledDataset,
    LdaModel,
    classify,
    class_centered,
    discriminant_scores,
    fit_lda,
    loocv_error,
    loocv_predictions,
    planted_dataset,
    pooled_sample_covariance,
    rank_features,
    select_features,
    t_statistics,
)
from sparsecov.rand_dist import make_rng
from sparsecov.shrinkage_gibbs import SamplerConfig


def two_class(X1, X2):
    X = np.vstack([X1, X2])
    return LabeledDataset(X, np.repeat([1, 2], [len(X1), len(X2)]))


class TestDataset:
    def test_validation(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((3, 2)), [1, 2, 3])
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((3, 2)), [1, 2])
        with pytest.raises(ValueError):
            LabeledDataset(np.array([[np.nan, 1.0]]), [1])
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((2, 2)), [1, 2], ["a"])

    def test_subset_keeps_names(self):
        d = planted_dataset(p=5)
        s = d.subset(rows=[0, 1, 39], cols=[4, 0])
        assert s.feature_names == ["g5", "g1"]
        np.testing.assert_array_equal(s.X, d.X[[0, 1, 39]][:, [4, 0]])


class TestSelection:
    def test_identical_means_rank_last(self):
        rng = make_rng(1)
        X1 = rng.standard_normal((30, 4))
        X2 = rng.standard_normal((30, 4))
        X2[:, 0] = X1[:, 0]
        X2[:, 1:] += np.array([2.0, 3.0, 4.0])
        d = two_class(X1, X2)
        assert t_statistics(d)[0] == 0
        assert rank_features(d)[-1] == 0

    def test_shifted_feature_ranks_first(self):
        hits = 0
        for seed in range(200):
            rng = make_rng(seed, 1)
            X1 = rng.standard_normal((20, 10))
            X2 = rng.standard_normal((20, 10))
            X2[:, 0] += 3.0
            hits += rank_features(two_class(X1, X2))[0] == 0
        # power of a 3-sd shift against 9 nulls at n = 20 per class is essentially 1
        assert hits / 200 >= 0.999

    def test_k_equals_p_is_a_permutation(self):
        d = planted_dataset(p=8)
        s = select_features(d, 8)
        assert sorted(s.feature_names) == sorted(d.feature_names)
        assert s.p == 8

    def test_zero_variance_feature(self):
        X1 = np.column_stack([np.ones(5), np.arange(5.0)])
        X2 = np.column_stack([np.ones(5), np.arange(5.0) + 1])
        t = t_statistics(two_class(X1, X2))
        assert t[0] == 0 and np.isfinite(t[1])

    def test_ties_keep_lower_index(self):
        X1 = np.array([[0.0, 0.0, 1.0], [1.0, 1.0, 2.0], [2.0, 2.0, 0.0]])
        X2 = X1 + np.array([1.0, 1.0, 0.0])
        assert list(rank_features(two_class(X1, X2))) == [0, 1, 2]

    def test_hand_t(self):
        X1 = np.array([[1.0], [2.0], [3.0]])
        X2 = np.array([[4.0], [5.0], [6.0]])
        # diff -3, pooled var 1, se sqrt(2/3)
        assert t_statistics(two_class(X1, X2))[0] == pytest.approx(-3 / math.sqrt(2 / 3))

    def test_welch_equal_sizes_matches_pooled(self):
        d = planted_dataset()
        np.testing.assert_allclose(t_statistics(d, welch=True), t_statistics(d), rtol=1e-12)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            select_features(planted_dataset(p=4), 5)
        with pytest.raises(ValueError):
            select_features(planted_dataset(p=4), 0)

    def test_class_too_small(self):
        with pytest.raises(ValueError):
            t_statistics(LabeledDataset(np.arange(4.0)[:, None], [1, 2, 2, 2]))


class TestDiscriminant:
    def model(self, Sigma, m1, m2, w1=0.5):
        return LdaModel(np.asarray(Sigma, float), (np.asarray(m1, float), np.asarray(m2, float)), (w1, 1 - w1))

    def test_boundary_is_first_coordinate(self):
        m = self.model(np.eye(3), [1, 0, 0], [-1, 0, 0])
        rng = make_rng(2)
        for x in rng.standard_normal((200, 3)):
            assert classify(m, x) == (1 if x[0] >= 0 else 2)

    def test_equal_means_follow_prior(self):
        m = self.model(np.eye(2), [0.5, 0.5], [0.5, 0.5], w1=0.7)
        assert np.all(classify(m, make_rng(3).standard_normal((50, 2))) == 1)
        m = self.model(np.eye(2), [0.5, 0.5], [0.5, 0.5], w1=0.3)
        assert np.all(classify(m, make_rng(3).standard_normal((50, 2))) == 2)

    def test_midpoint_tie_goes_to_class_one(self):
        m = self.model(np.eye(2), [1.0, 2.0], [3.0, 0.0])
        s = discriminant_scores(m, [2.0, 1.0])[0]
        assert s[0] == pytest.approx(s[1])
        assert classify(m, [2.0, 1.0]) == 1

    def test_at_class_mean(self):
        m = self.model(np.array([[2.0, 0.3], [0.3, 1.0]]), [1.0, -1.0], [-1.0, 2.0])
        assert classify(m, [1.0, -1.0]) == 1
        assert classify(m, [-1.0, 2.0]) == 2

    def test_prior_shift(self):
        a = self.model(np.eye(2), [1.0, 0.0], [0.0, 1.0], w1=0.5)
        b = self.model(np.eye(2), [1.0, 0.0], [0.0, 1.0], w1=0.8)
        x = make_rng(4).standard_normal((10, 2))
        da = discriminant_scores(a, x) @ [1, -1]
        db = discriminant_scores(b, x) @ [1, -1]
        np.testing.assert_allclose(db - da, math.log(4.0), rtol=1e-12)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-20, 20), st.floats(-20, 20))
    @settings(max_examples=150, deadline=None)
    def test_translation_invariance(self, x0, x1, d0, d1):
        Sigma = np.array([[1.5, 0.2], [0.2, 0.8]])
        m1, m2, x, d = np.array([0.4, -0.1]), np.array([-0.3, 0.6]), np.array([x0, x1]), np.array([d0, d1])
        a = discriminant_scores(self.model(Sigma, m1, m2, w1=0.4), x)[0] @ [1, -1]
        b = discriminant_scores(self.model(Sigma, m1 + d, m2 + d, w1=0.4), x + d)[0] @ [1, -1]
        assert b == pytest.approx(a, abs=1e-9 * (1 + abs(d).sum()))

    def test_univariate_threshold(self):
        s2, m1, m2, w1 = 2.0, 1.5, -0.5, 0.3
        m = self.model([[s2]], [m1], [m2], w1=w1)
        thr = (m1 + m2) / 2 - s2 * math.log(w1 / (1 - w1)) / (m1 - m2)
        for x in np.linspace(-5, 5, 101):
            if abs(x - thr) > 1e-9:
                assert classify(m, [x]) == (1 if x > thr else 2)

    def test_priors_validated(self):
        with pytest.raises(ValueError):
            LdaModel(np.eye(1), (np.zeros(1), np.ones(1)), (0.5, 0.6))

    def test_wrong_width(self):
        m = self.model(np.eye(2), [1.0, 0.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            discriminant_scores(m, [1.0, 2.0, 3.0])


class TestFit:
    def test_pooled_covariance(self):
        d = planted_dataset()
        Xc = class_centered(d)
        for c in (1, 2):
            np.testing.assert_allclose(Xc[d.labels == c].mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(pooled_sample_covariance(Xc), Xc.T @ Xc / (d.n - 2))

    def test_rank_deficient_is_ridged(self):
        Xc = np.column_stack([np.arange(6.0), np.arange(6.0)])
        S = pooled_sample_covariance(Xc - Xc.mean(axis=0))
        assert np.all(np.linalg.eigvalsh(S) > 0)

    def test_priors_from_class_sizes(self):
        d = LabeledDataset(make_rng(5).standard_normal((10, 2)), [1] * 7 + [2] * 3)
        assert fit_lda(d).priors == (0.7, 0.3)

    def test_callable_estimator(self):
        d = planted_dataset(p=3)
        m = fit_lda(d, lambda Xc: np.eye(3))
        np.testing.assert_array_equal(m.Sigma_hat, np.eye(3))

    def test_unknown_estimator(self):
        with pytest.raises(ValueError):
            fit_lda(planted_dataset(p=3), "ledoit")


class TestLoocv:
    def test_separated_1d(self):
        d = LabeledDataset(np.r_[np.arange(5.0), 100 + np.arange(5.0)][:, None], [1] * 5 + [2] * 5)
        assert loocv_error(d, None) == 0.0

    def test_pure_noise(self):
        rng = make_rng(6)
        errs = []
        for seed in range(5):
            rng = make_rng(6, seed)
            d = LabeledDataset(rng.standard_normal((40, 5)), np.repeat([1, 2], 20))
            errs.append(loocv_error(d, 3))
        assert abs(np.mean(errs) - 0.5) < 0.15

    def test_leaked_selection_is_optimistic(self):
        rng = make_rng(8)
        d = LabeledDataset(rng.standard_normal((30, 200)), np.repeat([1, 2], 15))
        honest = loocv_error(d, 5)
        leaked = loocv_error(d, 5, full_data_selection=True)
        assert leaked < honest - 0.15

    def test_empty_class_fold_skipped(self):
        d = LabeledDataset(make_rng(9).standard_normal((5, 2)), [1, 1, 1, 1, 2])
        with pytest.warns(EmptyClassWarning):
            pred = loocv_predictions(d, None)
        assert pred[4] == 0 and np.all(pred[:4] > 0)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            loocv_error(LabeledDataset(np.zeros((2, 1)), [1, 2]), None)

    def test_reproducible_with_sampler(self):
        d = planted_dataset(n_per_class=6, p=4)
        es = EstimatorSettings(sampler=SamplerConfig(burn_in=20, n_samples=20))
        a = loocv_predictions(d, 3, "shrinkage", es, seed=3)
        b = loocv_predictions(d, 3, "shrinkage", es, seed=3)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("estimator", ESTIMATORS)
    def test_planted_error_small(self, estimator):
        d = planted_dataset()
        es = EstimatorSettings(sampler=SamplerConfig(burn_in=200, n_samples=200))
        assert loocv_error(d, 5, estimator, es, seed=1) < 0.1
