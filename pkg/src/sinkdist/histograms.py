"""Histograms on the probability simplex: validation, entropy, sampling."""

from __future__ import annotations

import numpy as np

__all__ = [
    "Histogram",
    "normalize",
    "entropy",
    "sample_simplex",
    "image_to_histogram",
]

#: absolute tolerance on the sum-to-one invariant; loose enough to absorb
#: ingestion rounding, tight enough to catch genuinely unnormalized input
SUM_TOLERANCE = 1e-9


class Histogram:
    """A point of the probability simplex: nonnegative weights summing to one.

    Instances are immutable; the weight vector is stored as a read-only
    float64 array. Entropy is measured in nats throughout the package.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("histogram weights must be a nonempty 1-D vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("histogram weights must be finite")
        if np.any(w < 0):
            raise ValueError("histogram weights must be nonnegative")
        total = float(w.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(
                f"histogram weights must sum to 1 within {SUM_TOLERANCE:g}, got {total!r}"
            )
        w = w.copy()
        w.flags.writeable = False
        self._weights = w

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def dim(self) -> int:
        return self._weights.size

    def __len__(self) -> int:
        return self._weights.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return self._weights.shape == other._weights.shape and bool(
            np.all(self._weights == other._weights)
        )

    def __hash__(self):
        return hash(self._weights.tobytes())

    def __repr__(self) -> str:
        return f"Histogram(dim={self.dim})"


def normalize(raw) -> Histogram:
    """Rescale a nonnegative vector by its total mass.

    Raises ValueError if any entry is negative or all entries are zero.
    """
    v = np.asarray(raw, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a nonempty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("entries must be finite")
    if np.any(v < 0):
        raise ValueError("entries must be nonnegative")
    total = v.sum()
    if total <= 0:
        raise ValueError("cannot normalize a vector with no mass")
    # inputs already of unit mass pass through untouched, which makes the
    # operation exactly idempotent despite rounding in the division
    if abs(total - 1.0) <= 1e-12:
        return Histogram(v)
    return Histogram(v / total)


def entropy(r: Histogram) -> float:
    """Shannon entropy in nats, with the 0*log(0) = 0 convention."""
    return weight_entropy(r.weights)


def weight_entropy(w: np.ndarray) -> float:
    """Entropy of a raw nonnegative weight array (zeros contribute nothing)."""
    positive = w[w > 0]
    return float(-(positive * np.log(positive)).sum())


def sample_simplex(d: int, seed: int) -> Histogram:
    """Draw one histogram uniformly from the d-dimensional simplex.

    Uses the flat Dirichlet (normalized exponential spacings), which is the
    uniform distribution on the simplex. Deterministic for a fixed seed.
    """
    if d < 1:
        raise ValueError("simplex dimension must be at least 1")
    rng = np.random.default_rng(seed)
    return Histogram(rng.dirichlet(np.ones(d)))


def image_to_histogram(pixels) -> Histogram:
    """Flatten a 2-D intensity grid row-major and normalize by total mass.

    The row-major ordering matches the pixel ordering used by the grid
    ground-metric constructors, so bin i of the histogram and row/column i
    of the cost matrix refer to the same pixel.
    """
    grid = np.asarray(pixels, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError("expected a nonempty 2-D intensity grid")
    return normalize(grid.reshape(-1))
