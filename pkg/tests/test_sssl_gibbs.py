import math

import numpy as np
import pytest

from sparsecov import _column
from sparsecov.datagen import c1_covariance, sample_gaussian_data
from sparsecov.diagnostics import ess_columns
from sparsecov.matrix_core import is_pd
from sparsecov.rand_dist import make_rng
from sparsecov.shrinkage_gibbs import SamplerConfig, TruncationError, refresh_precision
from sparsecov.sssl_gibbs import (
    SsslHyperparams,
    init_sssl_chain,
    run_sssl_chain,
    slab_probability,
    sssl_sweep,
)


@pytest.fixture(scope="module")
def c1_data():
    return sample_gaussian_data(c1_covariance(), 250, 21)


def test_defaults():
    h = SsslHyperparams().resolve(250, 12)
    assert h.nu0_sq == pytest.approx(0.02**2)
    assert h.nu1_sq == 1.0
    assert h.pi_mix == pytest.approx(2.0 / 11.0)
    assert SsslHyperparams().resolve(10, 3).pi_mix == 0.5


@pytest.mark.parametrize("kw", [dict(nu0_sq=2.0, nu1_sq=1.0), dict(nu0_sq=0.0), dict(pi_mix=1.0), dict(pi_mix=0.0), dict(lam=-1.0)])
def test_invalid_hyper(kw):
    with pytest.raises(ValueError):
        SsslHyperparams(**kw)


class TestIndicatorProbability:
    def test_zero_sigma(self):
        h = SsslHyperparams(nu0_sq=1e-4, nu1_sq=1.0, pi_mix=0.5)
        prob = float(slab_probability(0.0, h))
        assert prob == pytest.approx(1.0 / 101.0, rel=1e-12)
        assert abs(prob - 0.00995) < 1e-4

    def test_large_sigma(self):
        h = SsslHyperparams(nu0_sq=1e-4, nu1_sq=1.0, pi_mix=0.5)
        assert float(slab_probability(3.0, h)) > 0.999
        assert float(slab_probability(-3.0, h)) > 0.999

    def test_pi_to_one(self):
        for sigma in (0.0, 1e-3, 0.5):
            assert float(slab_probability(sigma, SsslHyperparams(nu0_sq=1e-4, pi_mix=1 - 1e-12))) > 1 - 1e-6

    def test_monotone_in_abs_sigma(self):
        h = SsslHyperparams(pi_mix=0.1)
        grid = np.linspace(0, 2, 2001)
        prob = slab_probability(grid, h)
        assert np.all(np.diff(prob) >= 0)
        np.testing.assert_array_equal(prob, slab_probability(-grid, h))

    def test_no_overflow_extreme(self):
        h = SsslHyperparams(nu0_sq=1e-12, nu1_sq=1.0, pi_mix=0.5)
        prob = slab_probability(np.array([0.0, 1e3, 1e150]), h)
        assert np.all(np.isfinite(prob)) and np.all((prob >= 0) & (prob <= 1))

    def test_sampled_frequency(self):
        h = SsslHyperparams(nu0_sq=1e-3, nu1_sq=1.0, pi_mix=0.3)
        Sig = np.array([[1.0, 0.05, 0.0], [0.05, 1.0, 0.12], [0.0, 0.12, 1.0]])
        Z = np.zeros((3, 3))
        gen = make_rng(3)
        N = 20000
        acc = np.zeros((3, 3))
        for _ in range(N):
            _column.indicator_pass(Sig, Z, math.log(0.3 / 0.7), 1e-3, 1.0, gen)
            acc += Z
            assert np.array_equal(Z, Z.T)
        expected = slab_probability(Sig, h)
        iu = np.triu_indices(3, 1)
        se = np.sqrt(expected[iu] * (1 - expected[iu]) / N)
        assert np.all(np.abs(acc[iu] / N - expected[iu]) < 4 * se + 1e-12)


class TestSweep:
    def test_pd_and_symmetry(self, c1_data):
        st = init_sssl_chain(c1_data, seed=1)
        h = SsslHyperparams()
        for _ in range(300):
            sssl_sweep(st, h)
            assert is_pd(st.Sigma)
            assert np.array_equal(st.Sigma, st.Sigma.T)
            assert np.array_equal(st.Z, st.Z.T)
            assert set(np.unique(st.Z[~np.eye(12, dtype=bool)])) <= {0.0, 1.0}
            assert np.all(np.diag(st.Z) == 0)

    def test_initial_state(self, c1_data):
        st = init_sssl_chain(c1_data)
        assert np.all(st.Z[~np.eye(12, dtype=bool)] == 1.0)

    def test_reproducible(self, c1_data):
        cfg = SamplerConfig(burn_in=50, n_samples=50, seed=4)
        np.testing.assert_array_equal(run_sssl_chain(c1_data, config=cfg).mean, run_sssl_chain(c1_data, config=cfg).mean)

    def test_truncation_restores_indicators(self):
        X = math.sqrt(5.0) * make_rng(1).standard_normal((100, 3))
        st = init_sssl_chain(X)
        Z0 = st.Z.copy()
        with pytest.raises(TruncationError):
            sssl_sweep(st, SsslHyperparams(tau=1.0001))
        np.testing.assert_array_equal(st.Z, Z0)

    def test_c1_summary(self, c1_data):
        s = run_sssl_chain(c1_data, config=SamplerConfig(burn_in=500, n_samples=500, seed=2))
        assert np.all(s.lower95 <= s.mean) and np.all(s.mean <= s.upper95)
        assert np.all((s.ess > 0) & (s.ess <= 500))


class TestMixtureCollapse:
    def test_indicators_ignore_data(self, c1_data):
        h = SsslHyperparams(nu0_sq=0.3, nu1_sq=0.3, pi_mix=0.25)
        st = init_sssl_chain(c1_data, seed=5)
        iu = np.triu_indices(12, 1)
        freq = []
        for _ in range(400):
            sssl_sweep(st, h)
            freq.append(st.Z[iu].mean())
        assert abs(np.mean(freq) - 0.25) < 0.02

    def test_sigma_chain_matches_single_gaussian_prior(self, c1_data):
        nu_sq, lam = 0.3, 1.0
        h = SsslHyperparams(nu0_sq=nu_sq, nu1_sq=nu_sq, pi_mix=0.4, lam=lam)
        cfg = SamplerConfig(burn_in=500, n_samples=4000, seed=6)
        sssl = run_sssl_chain(c1_data, h, cfg)

        # same prior written directly: constant prior variances, no indicators
        st = init_sssl_chain(c1_data, seed=7)
        V = np.full((12, 12), nu_sq)
        order = np.arange(12, dtype=np.int64)
        draws = []
        for i in range(4500):
            refresh_precision(st)
            _column.column_pass(st.Sigma, st.Omega, st.S, V, order, float(st.n), lam, st.rng)
            if i >= 500:
                draws.append(st.Sigma.copy())
        draws = np.array(draws)
        direct_mean = draws.mean(axis=0)
        ess_direct = ess_columns(draws.reshape(len(draws), -1)).reshape(12, 12)
        var = draws.var(axis=0)
        se = np.sqrt(var / ess_direct + var / sssl.ess)
        z = np.abs(sssl.mean - direct_mean) / se
        assert np.max(z) < 4.5
