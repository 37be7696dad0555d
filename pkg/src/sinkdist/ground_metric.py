"""Ground cost matrices: construction, metric-cone validation, normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import squareform, pdist

__all__ = [
    "CostMatrix",
    "MetricConeReport",
    "validate_metric_cone",
    "grid_euclidean_metric",
    "power_transform",
    "random_points_metric",
    "median_normalize",
]

#: triangle inequalities are cubic in the dimension; constructors skip the
#: check above this size and leave the matrix marked unvalidated
AUTO_VALIDATE_LIMIT = 2048


class CostMatrix:
    """A square nonnegative cost matrix over histogram bins.

    ``validated_metric`` records that a metric-cone check (zero diagonal,
    symmetry, all triangle inequalities) has passed; it is never set without
    running the check or deriving it from a metric-preserving transform.
    """

    __slots__ = ("_entries", "validated_metric")

    def __init__(self, entries, validated_metric: bool = False):
        m = np.asarray(entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"cost matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("cost matrix entries must be finite")
        if np.any(m < 0):
            raise ValueError("cost matrix entries must be nonnegative")
        m = m.copy()
        m.flags.writeable = False
        self._entries = m
        self.validated_metric = bool(validated_metric)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __repr__(self) -> str:
        return f"CostMatrix(dim={self.dim}, validated_metric={self.validated_metric})"


@dataclass
class MetricConeReport:
    """Outcome of a metric-cone check with a capped list of counterexamples."""

    passed: bool
    diagonal_ok: bool
    symmetric: bool
    violations: list[tuple[int, int, int]] = field(default_factory=list)
    violation_count: int = 0

    def __bool__(self) -> bool:
        return self.passed


def _as_entries(M) -> np.ndarray:
    if isinstance(M, CostMatrix):
        return M.entries
    m = np.asarray(M, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {m.shape}")
    return m


def validate_metric_cone(M, atol: float = 1e-9, max_violations: int = 100) -> MetricConeReport:
    """Check membership in the cone of distance matrices.

    Passes iff the diagonal is zero, the matrix is symmetric within ``atol``
    and every triangle inequality m[i,j] <= m[i,k] + m[k,j] holds within
    ``atol``. Violating triples (i, j, k) are reported up to
    ``max_violations``; the total count is always exact.
    """
    m = _as_entries(M)
    d = m.shape[0]
    diagonal_ok = bool(np.all(np.abs(np.diag(m)) <= atol))
    symmetric = bool(np.all(np.abs(m - m.T) <= atol))

    violations: list[tuple[int, int, int]] = []
    violation_count = 0
    # one slice per intermediate point keeps memory at O(d^2)
    for k in range(d):
        excess = m - (m[:, k][:, None] + m[k, :][None, :])
        bad = np.argwhere(excess > atol)
        if bad.size:
            violation_count += bad.shape[0]
            for i, j in bad:
                if len(violations) < max_violations:
                    violations.append((int(i), int(j), int(k)))

    passed = diagonal_ok and symmetric and violation_count == 0
    return MetricConeReport(passed, diagonal_ok, symmetric, violations, violation_count)


def _auto_flag(entries: np.ndarray, validate: bool | None) -> bool:
    if validate is None:
        validate = entries.shape[0] <= AUTO_VALIDATE_LIMIT
    return bool(validate and validate_metric_cone(entries).passed)


def grid_euclidean_metric(width: int, height: int, validate: bool | None = None) -> CostMatrix:
    """Euclidean distances between the pixels of a width x height grid.

    Pixels are ordered row-major, matching ``image_to_histogram``. With
    ``validate=None`` the metric-cone check runs automatically for
    dimensions up to 2048.
    """
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    points = np.column_stack([cols.reshape(-1), rows.reshape(-1)]).astype(np.float64)
    entries = squareform(pdist(points)) if points.shape[0] > 1 else np.zeros((1, 1))
    return CostMatrix(entries, validated_metric=_auto_flag(entries, validate))


def power_transform(M: CostMatrix, a: float) -> CostMatrix:
    """Entrywise fractional power m[i,j] ** a with a in (0, 1].

    Fractional powers are concave with f(0) = 0, so they preserve triangle
    inequalities; a validated input therefore stays validated.
    """
    if not 0 < a <= 1:
        raise ValueError(f"power exponent must lie in (0, 1], got {a!r}")
    m = _as_entries(M)
    out = np.where(m > 0, m, 1.0) ** a
    out[m <= 0] = 0.0
    flag = M.validated_metric if isinstance(M, CostMatrix) else False
    return CostMatrix(out, validated_metric=flag)


def random_points_metric(d: int, seed: int, validate: bool | None = None) -> CostMatrix:
    """Pairwise distances between d Gaussian points in dimension ceil(d/10).

    The ambient dimension shrinks with d so that the resulting distance
    matrix has enough variability without being near-degenerate; it is
    rounded up so small d still gets at least one coordinate. Deterministic
    per seed.
    """
    if d < 2:
        raise ValueError("need at least 2 points for a distance matrix")
    ambient = math.ceil(d / 10)
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((d, ambient))
    entries = squareform(pdist(points))
    return CostMatrix(entries, validated_metric=_auto_flag(entries, validate))


def median_normalize(M: CostMatrix) -> CostMatrix:
    """Divide every entry by the median over all d^2 entries.

    The median is taken over the full matrix including the zero diagonal
    (the even-count convention averages the two central order statistics),
    so this is not the median of pairwise distances. For tiny matrices the
    zero diagonal can dominate and drive the median to zero, which raises
    rather than silently switching conventions.
    """
    m = _as_entries(M)
    med = float(np.median(m))
    if med <= 0:
        raise ValueError(
            "median of all entries is zero (diagonal-dominated order statistics); "
            "matrix too small or too sparse to median-normalize"
        )
    flag = M.validated_metric if isinstance(M, CostMatrix) else False
    return CostMatrix(m / med, validated_metric=flag)
