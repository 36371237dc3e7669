import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sparsecov.datagen import c1_covariance
from sparsecov.matrix_core import (
    ColumnPartition,
    NotPDError,
    cholesky,
    is_pd,
    min_max_eigenvalues,
    partition_column,
    reassemble,
    solve_spd,
)


def random_pd(rng, p, eps=1e-3):
    A = rng.standard_normal((p, p))
    return A.T @ A + eps * np.eye(p)


@st.composite
def pd_matrices(draw, max_p=8):
    p = draw(st.integers(2, max_p))
    A = draw(arrays(np.float64, (p, p), elements=st.floats(-3, 3, allow_nan=False, width=64)))
    eps = draw(st.floats(1e-3, 1.0))
    return A.T @ A + eps * np.eye(p)


class TestPartition:
    def test_identity(self):
        part = partition_column(np.eye(2), 1)
        np.testing.assert_array_equal(part.Sigma11, [[1.0]])
        np.testing.assert_array_equal(part.sigma12, [0.0])
        assert part.sigma22 == 1.0

    def test_c1_first_column(self):
        part = partition_column(c1_covariance(), 0)
        assert part.sigma22 == 0.239
        # variable 2 sits at position 0, variable 8 at position 6 once column 1 is removed
        assert part.sigma12[0] == 0.117
        assert part.sigma12[6] == 0.031

    def test_reassemble_identity(self):
        part = ColumnPartition(np.array([[1.0]]), np.array([0.0]), 1.0, 1)
        np.testing.assert_array_equal(reassemble(part), np.eye(2))

    @pytest.mark.parametrize("j", range(12))
    def test_c1_round_trip(self, j):
        C = c1_covariance()
        np.testing.assert_array_equal(reassemble(partition_column(C, j)), C)

    def test_random_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = int(rng.integers(2, 9))
            M = random_pd(rng, p)
            M = 0.5 * (M + M.T)
            for j in range(p):
                np.testing.assert_array_equal(reassemble(partition_column(M, j)), M)

    @given(pd_matrices())
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, M):
        M = 0.5 * (M + M.T)
        for j in range(M.shape[0]):
            assert np.array_equal(reassemble(partition_column(M, j)), M)

    def test_errors(self):
        with pytest.raises((ValueError, IndexError)):
            partition_column(np.eye(3), 3)
        with pytest.raises(ValueError):
            partition_column(np.eye(1), 0)


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(4)), np.eye(4))

    def test_hand_example(self):
        L = cholesky(np.array([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(L, [[2, 0], [1, math.sqrt(2)]], rtol=1e-14)
        np.testing.assert_allclose(L @ L.T, [[4, 2], [2, 3]], rtol=1e-14)

    def test_c1(self):
        L = cholesky(c1_covariance())
        assert np.all(np.diag(L) > 0)

    def test_not_pd(self):
        with pytest.raises(NotPDError):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert not is_pd(np.array([[1.0, 2.0], [2.0, 1.0]]))

    @given(pd_matrices())
    @settings(max_examples=60, deadline=None)
    def test_reconstruction(self, M):
        M = 0.5 * (M + M.T)
        L = cholesky(M)
        assert np.allclose(np.triu(L, 1), 0)
        assert np.all(np.diag(L) > 0)
        assert np.linalg.norm(L @ L.T - M) / np.linalg.norm(M) <= 1e-10


class TestSolve:
    def test_identity(self):
        rhs = np.array([1.5, -2.0, 3.0])
        np.testing.assert_allclose(solve_spd(np.eye(3), rhs), rhs)

    def test_diagonal(self):
        np.testing.assert_allclose(solve_spd(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0])

    def test_random_6x6(self):
        rng = np.random.default_rng(1)
        M = random_pd(rng, 6)
        rhs = rng.standard_normal(6)
        y = solve_spd(M, rhs)
        assert np.max(np.abs(M @ y - rhs)) <= 1e-8 * np.max(np.abs(rhs))

    @given(pd_matrices(), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_residual_property(self, M, seed):
        M = 0.5 * (M + M.T)
        rhs = np.random.default_rng(seed).standard_normal(M.shape[0])
        y = solve_spd(M, rhs)
        assert np.max(np.abs(M @ y - rhs)) <= 1e-8 * np.max(np.abs(rhs))

    def test_not_pd_propagates(self):
        with pytest.raises(NotPDError):
            solve_spd(np.array([[0.0, 1.0], [1.0, 0.0]]), [1.0, 1.0])


class TestEigen:
    def test_identity(self):
        assert min_max_eigenvalues(np.eye(3)) == pytest.approx((1.0, 1.0))

    def test_diagonal(self):
        assert min_max_eigenvalues(np.diag([0.5, 3.0])) == pytest.approx((0.5, 3.0), rel=1e-8)

    def test_two_by_two(self):
        assert min_max_eigenvalues(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx((1.0, 3.0), rel=1e-8)

    @given(arrays(np.float64, st.integers(1, 10), elements=st.floats(1e-3, 1e3)))
    @settings(max_examples=50, deadline=None)
    def test_diagonal_property(self, d):
        lo, hi = min_max_eigenvalues(np.diag(d))
        assert lo == pytest.approx(d.min(), rel=1e-8)
        assert hi == pytest.approx(d.max(), rel=1e-8)
