"""Dense symmetric linear-algebra primitives.

All matrices are plain ``numpy`` arrays.  Symmetric inputs are validated and
re-symmetrized on entry; eigenvectors follow a fixed sign convention so that
downstream bootstrap determinants are reproducible.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import DEFAULT_TOL
from .errors import InvalidInputError, ShapeError, SingularMatrixError


class EigenDecomposition(NamedTuple):
    """Spectral decomposition ``A = P diag(values) P.T``.

    ``values`` are sorted non-increasing and each column of ``P`` has its
    largest-magnitude entry non-negative (ties broken by lowest index).
    """

    vectors: np.ndarray
    values: np.ndarray


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return ``(a + a.T) / 2``."""
    a = np.asarray(a, dtype=float)
    return (a + a.T) / 2.0


def check_symmetric(a: np.ndarray, tol: float = DEFAULT_TOL.symmetry) -> np.ndarray:
    """Validate a square, finite, (near-)symmetric matrix and return it symmetrized."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix contains non-finite entries")
    if np.max(np.abs(a - a.T)) > tol:
        raise InvalidInputError("matrix is not symmetric within tolerance")
    return symmetrize(a)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry of each column made non-negative; ties broken by
    # the lowest row index (np.argmax picks the first maximum).
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        lead = col[np.argmax(np.abs(col))]
        if lead < 0:
            out[:, j] = -col
    return out


def sym_eig(a: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix with deterministic conventions.

    Eigenvalues are returned in non-increasing order and eigenvector signs are
    fixed so that repeated calls on the same input agree exactly.
    """
    a = check_symmetric(a)
    values, vectors = np.linalg.eigh(a)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = _fix_signs(vectors[:, order])
    return EigenDecomposition(vectors=vectors, values=values)


def sym_inv_sqrt(m: np.ndarray, min_eig: float = DEFAULT_TOL.min_eigenvalue) -> np.ndarray:
    """Inverse square root ``R`` of a symmetric positive definite ``M``: ``R M R = I``."""
    eig = sym_eig(m)
    if eig.values[-1] <= min_eig:
        raise SingularMatrixError(
            f"matrix is not positive definite (min eigenvalue {eig.values[-1]:.3e})"
        )
    r = eig.vectors @ np.diag(1.0 / np.sqrt(eig.values)) @ eig.vectors.T
    return symmetrize(r)


def norms(a: np.ndarray) -> tuple[float, float, float]:
    """Return ``(frobenius, max_abs, row_sum_inf)`` of a matrix."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix contains non-finite entries")
    a2 = np.atleast_2d(a)
    fro = float(np.sqrt(np.sum(a2 * a2)))
    max_abs = float(np.max(np.abs(a2))) if a2.size else 0.0
    row_inf = float(np.max(np.sum(np.abs(a2), axis=1))) if a2.size else 0.0
    return fro, max_abs, row_inf


def cholesky_sample(
    sigma: np.ndarray, n: int, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    """Draw ``n`` rows from ``N(0, sigma)`` via the Cholesky factor."""
    sigma = check_symmetric(sigma)
    rng = np.random.default_rng(rng)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("covariance is not positive definite") from exc
    z = rng.standard_normal((n, sigma.shape[0]))
    return z @ chol.T
