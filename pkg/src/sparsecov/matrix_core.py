"""Dense symmetric-matrix helpers shared by the samplers.

Matrices are plain ``numpy.ndarray`` objects; the functions here validate
shape/symmetry on entry and never repair a matrix silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import linalg


class NotPDError(np.linalg.LinAlgError):
    """Raised when a matrix that must be positive definite is not."""


class EigenConvergenceError(np.linalg.LinAlgError):
    pass


def check_symmetric(M, *, name: str = "matrix") -> NDArray:
    """Return ``M`` as a float array after checking it is square and exactly symmetric."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{name} is not symmetric")
    return A


@dataclass(frozen=True)
class ColumnPartition:
    """Block view of a symmetric matrix with row/column ``index`` moved last.

    ``Sigma11`` keeps the remaining rows/columns in their original order.
    """

    Sigma11: NDArray
    sigma12: NDArray
    sigma22: float
    index: int

    @property
    def dim(self) -> int:
        return self.Sigma11.shape[0] + 1


def other_indices(p: int, j: int) -> NDArray:
    """Indices ``0..p-1`` with ``j`` removed."""
    return np.concatenate([np.arange(j), np.arange(j + 1, p)])


def partition_column(M, j: int) -> ColumnPartition:
    """Split ``M`` into ``(Sigma11, sigma12, sigma22)`` around column ``j`` (0-based)."""
    A = check_symmetric(M)
    p = A.shape[0]
    if p < 2:
        raise ValueError("partition_column needs dim >= 2")
    if not 0 <= j < p:
        raise IndexError(f"column index {j} out of range for dim {p}")
    o = other_indices(p, j)
    return ColumnPartition(
        Sigma11=A[np.ix_(o, o)].copy(),
        sigma12=A[o, j].copy(),
        sigma22=float(A[j, j]),
        index=j,
    )


def reassemble(part: ColumnPartition) -> NDArray:
    """Inverse of :func:`partition_column`."""
    m = part.Sigma11.shape[0]
    if part.sigma12.shape != (m,):
        raise ValueError("sigma12 length does not match Sigma11")
    p = m + 1
    j = part.index
    if not 0 <= j < p:
        raise IndexError(f"column index {j} out of range for dim {p}")
    o = other_indices(p, j)
    out = np.empty((p, p))
    out[np.ix_(o, o)] = part.Sigma11
    out[o, j] = part.sigma12
    out[j, o] = part.sigma12
    out[j, j] = part.sigma22
    return out


def cholesky(M) -> NDArray:
    """Lower Cholesky factor of ``M``.

    Raises
    ------
    NotPDError
        If a non-positive pivot is met. No jitter is added.
    """
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    try:
        L = linalg.cholesky(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NotPDError(f"matrix is not positive definite: {exc}") from exc
    if not np.all(np.diag(L) > 0):
        raise NotPDError("Cholesky factor has a non-positive diagonal entry")
    return L


def is_pd(M) -> bool:
    try:
        cholesky(M)
    except NotPDError:
        return False
    return True


def solve_spd(M, rhs) -> NDArray:
    """Solve ``M y = rhs`` for symmetric positive definite ``M`` via Cholesky."""
    L = cholesky(M)
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != L.shape[0]:
        raise ValueError(f"rhs has {b.shape[0]} rows, matrix has dim {L.shape[0]}")
    return linalg.cho_solve((L, True), b)


def min_max_eigenvalues(M) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    A = check_symmetric(M)
    try:
        w = linalg.eigvalsh(A)
    except linalg.LinAlgError as exc:
        # LAPACK dsyevd iteration cap is internal; surface its report
        raise EigenConvergenceError(f"symmetric eigensolver did not converge: {exc}") from exc
    return float(w[0]), float(w[-1])
