"""Transport plans (couplings), their information quantities, and gluing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .histograms import Histogram, weight_entropy

__all__ = [
    "TransportPlan",
    "AlphaBall",
    "independence_table",
    "plan_entropy",
    "mutual_information",
    "in_alpha_ball",
    "glue",
]

#: tolerance absorbing solver round-off in marginal/mass checks
PLAN_TOLERANCE = 1e-9

#: slack on the mutual-information comparison defining ball membership
BALL_SLACK = 1e-9


class TransportPlan:
    """A joint probability table: nonnegative square matrix of total mass one.

    Marginals are computed from the entries at construction and cached as
    histograms; row i / column j of the matrix and bin i / bin j of the
    marginals refer to the same support points.
    """

    __slots__ = ("_entries", "_row", "_col")

    def __init__(self, entries):
        p = np.asarray(entries, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise ValueError(f"transport plan must be square, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("transport plan entries must be finite")
        if np.any(p < -PLAN_TOLERANCE):
            raise ValueError("transport plan entries must be nonnegative")
        p = np.where(p < 0, 0.0, p)  # clamp solver dust
        total = float(p.sum())
        if abs(total - 1.0) > PLAN_TOLERANCE:
            raise ValueError(
                f"transport plan mass must be 1 within {PLAN_TOLERANCE:g}, got {total!r}"
            )
        p = p.copy()
        p.flags.writeable = False
        self._entries = p
        self._row = Histogram(p.sum(axis=1) / total)
        self._col = Histogram(p.sum(axis=0) / total)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def row_marginal(self) -> Histogram:
        return self._row

    @property
    def col_marginal(self) -> Histogram:
        return self._col

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __repr__(self) -> str:
        return f"TransportPlan(dim={self.dim})"


@dataclass(frozen=True)
class AlphaBall:
    """Mutual-information budget (nats) defining a feasible set of plans."""

    alpha: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be a nonnegative real, got {self.alpha!r}")


def independence_table(r: Histogram, c: Histogram) -> TransportPlan:
    """The product coupling r c^T: the unique zero-mutual-information plan."""
    if r.dim != c.dim:
        raise ValueError(f"marginal dimensions differ: {r.dim} vs {c.dim}")
    return TransportPlan(np.outer(r.weights, c.weights))


def plan_entropy(P: TransportPlan) -> float:
    """Joint entropy of the plan in nats (zero entries contribute nothing)."""
    return weight_entropy(P.entries.reshape(-1))


def mutual_information(P: TransportPlan) -> float:
    """KL divergence of the plan from the product of its own marginals.

    Summed in the log domain over positive entries only; no smoothing. Any
    positive entry has positive marginals, so the ratio is always defined.
    """
    p = P.entries
    outer = np.outer(P.row_marginal.weights, P.col_marginal.weights)
    mask = p > 0
    return float((p[mask] * np.log(p[mask] / outer[mask])).sum())


def in_alpha_ball(P: TransportPlan, alpha: AlphaBall) -> bool:
    """Whether the plan's mutual information fits the given budget."""
    return mutual_information(P) <= alpha.alpha + BALL_SLACK


def glue(P: TransportPlan, Q: TransportPlan) -> TransportPlan:
    """Compose couplings through their shared middle marginal.

    For P coupling (x, y) and Q coupling (y, z), returns the coupling of
    (x, z) given by s[i,k] = sum_j p[i,j] q[j,k] / y[j], skipping indices
    with y[j] = 0. Mutual information never increases under this
    composition (the three variables form a Markov chain), so a budget
    satisfied by P and Q is satisfied by the result.
    """
    if P.dim != Q.dim:
        raise ValueError(f"plan dimensions differ: {P.dim} vs {Q.dim}")
    y_from_p = P.col_marginal.weights
    y_from_q = Q.row_marginal.weights
    if np.max(np.abs(y_from_p - y_from_q)) > PLAN_TOLERANCE:
        raise ValueError("column marginal of P must match row marginal of Q")
    y = y_from_p
    inv_y = np.where(y > 0, 1.0 / np.where(y > 0, y, 1.0), 0.0)
    # S = P diag(1/y) Q without materializing the three-way table
    entries = (P.entries * inv_y[None, :]) @ Q.entries
    return TransportPlan(entries)
