"""Dense symmetric linear algebra with explicit failure modes.

All routines take plain float64 ndarrays. Failure is reported through the
package exception hierarchy rather than numpy's, so callers can distinguish
"matrix is not positive definite" from "eigensolver did not converge" and
react accordingly.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularMatrix,
)

# A Cholesky pivot at or below this is treated as loss of positive
# definiteness rather than rounded through.
PIVOT_TOL = 1e-12

# Eigenvalues below this (in absolute value) make the condition number
# meaningless, so condition_number refuses rather than returning inf.
SINGULAR_TOL = 1e-14


def _require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Exact symmetric part (a + a.T) / 2."""
    a = _require_square(a)
    return (a + a.T) / 2.0


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor L with a = L @ L.T.

    Raises NotPositiveDefinite when any pivot falls to PIVOT_TOL or below,
    which is also how asymmetric or indefinite input surfaces.
    """
    a = _require_square(a)
    p = a.shape[0]
    L = np.zeros((p, p))
    for j in range(p):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= PIVOT_TOL:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at column {j} (threshold {PIVOT_TOL:.0e})"
            )
        L[j, j] = np.sqrt(pivot)
        if j + 1 < p:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def eigen_symmetric(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    a = _require_square(a)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    return values, vectors


def invert_spd(a: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky.

    The result is symmetrized exactly so downstream symmetry checks never
    trip on factorization round-off.
    """
    a = _require_square(a)
    L = cholesky(a)
    p = a.shape[0]
    # Solve L Y = I, then L.T X = Y; columns of X are the inverse's columns.
    eye = np.eye(p)
    y = np.linalg.solve(L, eye)
    inv = np.linalg.solve(L.T, y)
    return (inv + inv.T) / 2.0


def condition_number(a: np.ndarray) -> float:
    """Spectral condition number max|eig| / min|eig| of a symmetric matrix."""
    values, _ = eigen_symmetric(a)
    magnitudes = np.abs(values)
    smallest = float(magnitudes.min())
    if smallest < SINGULAR_TOL:
        raise SingularMatrix(
            f"smallest |eigenvalue| {smallest:.3e} below {SINGULAR_TOL:.0e}"
        )
    return float(magnitudes.max() / smallest)


def is_positive_definite(a: np.ndarray) -> bool:
    """True when the Cholesky factorization succeeds."""
    try:
        cholesky(a)
    except (NotPositiveDefinite, DimensionMismatch):
        return False
    return True
