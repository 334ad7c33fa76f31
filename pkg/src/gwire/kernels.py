"""Sample moment and SDR kernel-matrix estimators.

Provides the sample covariance, the distance-weighted inverse regression
kernel for metric-space responses, and classical SIR / CUME kernels for
scalar responses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidSlicingError, ShapeError
from .linalg import symmetrize


@dataclass(frozen=True)
class KernelEstimates:
    """Sample covariance and kernel matrix for one dataset."""

    sigma_hat: np.ndarray
    lambda_hat: np.ndarray
    n: int
    kernel_kind: str  # "wire" | "sir" | "cume"


def sample_covariance(x: np.ndarray) -> np.ndarray:
    """Sample covariance with divisor n (not n-1)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ShapeError(f"expected an n x p matrix, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least 2 observations")
    xc = x - x.mean(axis=0)
    return symmetrize(xc.T @ xc / n)


def wire_kernel(x: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Distance-weighted inverse regression kernel.

    Computes -sum_{i != j} (x_i - xbar)(x_j - xbar)' d_ij / {n(n-1)} via the
    matrix identity -Xc' D Xc / {n(n-1)}, valid because D has zero diagonal.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if x.ndim != 2:
        raise ShapeError(f"expected an n x p matrix, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least 2 observations")
    if d.shape != (n, n):
        raise ShapeError(f"distance matrix shape {d.shape} does not match n={n}")
    xc = x - x.mean(axis=0)
    lam = -xc.T @ d @ xc / (n * (n - 1))
    return symmetrize(lam)


def slice_assignments(y: np.ndarray, slices: int) -> np.ndarray:
    """Slice labels from sorted order with near-equal counts.

    The remainder is spread over the first slices; ties in y keep their
    sorted-stable order.
    """
    n = len(y)
    order = np.argsort(y, kind="stable")
    base, rem = divmod(n, slices)
    labels = np.empty(n, dtype=int)
    start = 0
    for h in range(slices):
        size = base + (1 if h < rem else 0)
        labels[order[start : start + size]] = h
        start += size
    return labels


def sir_kernel(x: np.ndarray, y: np.ndarray, slices: int = 10) -> np.ndarray:
    """Sliced inverse regression kernel: sum_h (n_h/n)(xbar_h - xbar)(xbar_h - xbar)'."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if slices < 2:
        raise InvalidSlicingError("need at least 2 slices")
    if n < 2 * slices:
        raise InvalidSlicingError(f"need at least {2 * slices} observations for {slices} slices")
    labels = slice_assignments(y, slices)
    xbar = x.mean(axis=0)
    lam = np.zeros((p, p))
    for h in range(slices):
        mask = labels == h
        nh = int(mask.sum())
        diff = x[mask].mean(axis=0) - xbar
        lam += (nh / n) * np.outer(diff, diff)
    return symmetrize(lam)


def cume_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cumulative mean estimation kernel.

    m(y) = n^{-1} sum_i (x_i - xbar) 1(y_i <= y); the kernel averages
    m(y_j) m(y_j)' over j.  The non-strict inequality is a fixed convention.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least 2 observations")
    xc = x - x.mean(axis=0)
    indic = (y[:, None] <= y[None, :]).astype(float)  # indic[i, j] = 1(y_i <= y_j)
    m = xc.T @ indic / n  # column j is m(y_j)
    return symmetrize(m @ m.T / n)


def estimate_kernels(
    x: np.ndarray,
    *,
    kind: str,
    distances: np.ndarray | None = None,
    y: np.ndarray | None = None,
    slices: int = 10,
) -> KernelEstimates:
    """Bundle the sample covariance with the requested kernel matrix."""
    sigma = sample_covariance(x)
    if kind == "wire":
        if distances is None:
            raise ShapeError("wire kernel requires a distance matrix")
        lam = wire_kernel(x, distances)
    elif kind == "sir":
        if y is None:
            raise ShapeError("sir kernel requires a scalar response vector")
        lam = sir_kernel(x, y, slices)
    elif kind == "cume":
        if y is None:
            raise ShapeError("cume kernel requires a scalar response vector")
        lam = cume_kernel(x, y)
    else:
        raise ShapeError(f"unknown kernel kind {kind!r}")
    return KernelEstimates(sigma_hat=sigma, lambda_hat=lam, n=x.shape[0], kernel_kind=kind)
