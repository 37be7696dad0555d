"""Closed-form histogram distances, the independence kernel, and Gram tools.

The independence kernel is the bilinear form r^T M c, the zero-budget limit
of the entropy-constrained transport distance. When M is a Euclidean distance
matrix (entries are squared point distances, possibly after a fractional
power), exponentiating the negated form gives a positive definite kernel, and
the bilinear form factors through a Gram decomposition that turns each
distance evaluation into two cached projections plus a dot product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr as _qr

from .ground_metric import CostMatrix
from .histograms import Histogram

__all__ = [
    "baseline_distance",
    "hellinger_distance",
    "chi2_distance",
    "total_variation_distance",
    "squared_euclidean_distance",
    "independence_kernel_distance",
    "IndependenceKernelPrecompute",
    "independence_precompute",
    "KernelMatrix",
    "kernel_matrix",
    "bandwidth_grid",
]


def _pair(r: Histogram, c: Histogram) -> tuple[np.ndarray, np.ndarray]:
    if r.dim != c.dim:
        raise ValueError(f"histogram dimensions differ: {r.dim} vs {c.dim}")
    return r.weights, c.weights


def hellinger_distance(r: Histogram, c: Histogram) -> float:
    """Squared difference of square roots, summed."""
    a, b = _pair(r, c)
    return float(((np.sqrt(a) - np.sqrt(b)) ** 2).sum())


def chi2_distance(r: Histogram, c: Histogram) -> float:
    """Sum of (a-b)^2 / (a+b) with the 0/0 := 0 convention."""
    a, b = _pair(r, c)
    s = a + b
    mask = s > 0
    return float(((a[mask] - b[mask]) ** 2 / s[mask]).sum())


def total_variation_distance(r: Histogram, c: Histogram) -> float:
    """Half the L1 distance between the weight vectors."""
    a, b = _pair(r, c)
    return float(0.5 * np.abs(a - b).sum())


def squared_euclidean_distance(r: Histogram, c: Histogram) -> float:
    a, b = _pair(r, c)
    return float(((a - b) ** 2).sum())


_BASELINES = {
    "hellinger": hellinger_distance,
    "chi2": chi2_distance,
    "total_variation": total_variation_distance,
    "squared_euclidean": squared_euclidean_distance,
}


def baseline_distance(kind: str, r: Histogram, c: Histogram) -> float:
    """Dispatch to one of the closed-form histogram distances by name."""
    try:
        fn = _BASELINES[kind]
    except KeyError:
        raise ValueError(
            f"unknown baseline {kind!r}; choose from {sorted(_BASELINES)}"
        ) from None
    return fn(r, c)


def independence_kernel_distance(r: Histogram, c: Histogram, M: CostMatrix) -> float:
    """The bilinear form r^T M c: expected cost under the product coupling.

    Not a metric (it is positive on identical histograms with spread-out
    mass), but bilinear in each argument and negative definite whenever M is
    a Euclidean distance matrix.
    """
    a, b = _pair(r, c)
    if r.dim != M.dim:
        raise ValueError(f"histogram dim {r.dim} does not match cost matrix dim {M.dim}")
    return float(a @ M.entries @ b)


@dataclass(frozen=True)
class IndependenceKernelPrecompute:
    """Gram factorization of an EDM cost matrix for fast bilinear evaluation.

    ``norms_u[i]`` is the squared norm of the implicit embedding point i and
    ``cholesky_L`` a lower-triangular factor with L L^T equal to the Gram
    matrix, so r^T M c = r^T u + c^T u - 2 (L^T r) . (L^T c).
    """

    norms_u: np.ndarray
    cholesky_L: np.ndarray

    def project(self, r: Histogram) -> np.ndarray:
        """Coordinates of a histogram in the embedding (cacheable per item)."""
        return self.cholesky_L.T @ r.weights

    def fast_distance(self, r: Histogram, c: Histogram) -> float:
        a, b = _pair(r, c)
        return float(a @ self.norms_u + b @ self.norms_u - 2.0 * (self.project(r) @ self.project(c)))


def independence_precompute(M: CostMatrix) -> IndependenceKernelPrecompute:
    """Recover a Gram factorization from an EDM-like cost matrix.

    Double centering K = -0.5 J M J (J the centering projector) recovers the
    Gram matrix of an embedding whenever the entries are squared Euclidean
    distances; tiny negative eigenvalues are clipped as numerical noise,
    anything clearly negative means M is not an EDM and raises. The
    triangular factor comes from a QR of the clipped eigenfactor, which keeps
    L L^T equal to the clipped Gram matrix to working precision without a
    diagonal jitter.
    """
    m = M.entries
    d = M.dim
    centered = m - m.mean(axis=0)[None, :]
    K = -0.5 * (centered - centered.mean(axis=1)[:, None])
    K = 0.5 * (K + K.T)
    eigvals, eigvecs = np.linalg.eigh(K)
    scale = max(float(eigvals[-1]), 0.0)
    worst = float(eigvals[0])
    if worst < -1e-6 * max(scale, 1.0):
        raise ValueError(
            f"cost matrix is not a Euclidean distance matrix: centering produced "
            f"eigenvalue {worst:g}"
        )
    clipped = np.where(eigvals > 0, eigvals, 0.0)
    W = eigvecs * np.sqrt(clipped)[None, :]
    # W W^T = K, so the R factor of W^T gives K = R^T R with R^T lower-triangular
    R = _qr(W.T, mode="economic")[1]
    L = np.zeros((d, d))
    L[:, : R.shape[0]] = R.T
    gram_diag = (L * L).sum(axis=1)
    return IndependenceKernelPrecompute(norms_u=gram_diag, cholesky_L=L)


@dataclass(frozen=True)
class KernelMatrix:
    """Exponentiated-distance Gram matrix with its PSD repair recorded."""

    entries: np.ndarray
    bandwidth_t: float
    diagonal_regularizer: float


def kernel_matrix(distances: np.ndarray, t: float) -> KernelMatrix:
    """Turn a symmetric distance matrix into exp(-d/t), repaired to PSD.

    If the exponentiated matrix has an eigenvalue below -1e-10, a constant
    |min eigenvalue| + 1e-10 is added to the diagonal and recorded.
    """
    D = np.asarray(distances, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {D.shape}")
    if not np.allclose(D, D.T, atol=1e-12, rtol=0.0):
        raise ValueError("distance matrix must be symmetric")
    if not t > 0:
        raise ValueError(f"bandwidth must be positive, got {t!r}")
    entries = np.exp(-D / t)
    entries = 0.5 * (entries + entries.T)
    smallest = float(np.linalg.eigvalsh(entries)[0])
    reg = 0.0
    if smallest < -1e-10:
        reg = abs(smallest) + 1e-10
        entries = entries + reg * np.eye(D.shape[0])
    return KernelMatrix(entries=entries, bandwidth_t=float(t), diagonal_regularizer=reg)


def bandwidth_grid(sample_distances) -> list[float]:
    """Candidate kernel bandwidths: 1 plus low/median quantiles of a sample.

    Quantiles use linear interpolation between order statistics.
    """
    sample = np.asarray(sample_distances, dtype=np.float64).reshape(-1)
    if sample.size == 0:
        raise ValueError("need at least one distance to build a bandwidth grid")
    q10, q20, q50 = np.percentile(sample, [10, 20, 50])
    return [1.0, float(q10), float(q20), float(q50)]
