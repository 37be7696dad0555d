"""Entropic-regularized transport divergence via Sinkhorn-Knopp scaling.

The solver is the plain fixed-point iteration on the scaled kernel: rows of
the source histogram with zero mass are dropped, the kernel K = exp(-lam * M)
is formed once, and the iterate x is rescaled until it stops changing. No
log-domain stabilization is applied; kernels that underflow fail fast with an
actionable error instead of producing NaNs deep inside the loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ground_metric import CostMatrix
from .histograms import Histogram
from .plans import TransportPlan

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None

__all__ = [
    "SinkhornConfig",
    "GibbsKernel",
    "SinkhornResult",
    "KernelUnderflowError",
    "NonFiniteIterateError",
    "gibbs_kernel",
    "sinkhorn_divergence",
    "sinkhorn_batch",
    "recover_plan",
]

#: below this, a kernel column carries no usable signal in float64
UNDERFLOW_FLOOR = 1e-300


class KernelUnderflowError(ArithmeticError):
    """The scaled kernel lost all mass in some column; lower lam or rescale M."""


class NonFiniteIterateError(ArithmeticError):
    """The scaling iterate overflowed or produced NaN."""

    def __init__(self, lam: float, iteration: int, column: int | None = None):
        self.lam = lam
        self.iteration = iteration
        self.column = column
        where = f" (column {column})" if column is not None else ""
        super().__init__(
            f"non-finite scaling iterate at iteration {iteration} with lam={lam:g}{where}; "
            "lower lam or median-normalize the cost matrix"
        )


@dataclass(frozen=True)
class SinkhornConfig:
    """Regularization strength plus exactly one stopping rule.

    The default rule stops when the Euclidean norm of the change in the
    iterate x drops below ``tolerance``; passing ``fixed_iterations`` instead
    runs an exact number of updates (the profile used when tracking the
    iterate on parallel hardware is too costly). ``max_iterations`` caps the
    tolerance rule; hitting the cap is reported, not raised.

    ``tail_corrected`` strengthens the tolerance rule to bound the relative
    distance to the fixed point itself. The change is measured entrywise
    relative to the iterate (entries of x span many orders of magnitude, and
    the small ones carry as much of the scaled plan as the large ones), and
    with linear convergence at observed rate rho the remaining tail is about
    |dx| * rho / (1 - rho); that corrected quantity must stay below the
    tolerance for two consecutive iterations. Downstream quantities that
    need many digits, like plan entropy in the constrained-distance search,
    rely on this mode. Near machine precision it can exhaust
    ``max_iterations`` instead of formally converging.
    """

    lam: float
    tolerance: float | None = 0.01
    fixed_iterations: int | None = None
    max_iterations: int = 100_000
    tail_corrected: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be a positive real, got {self.lam!r}")
        if (self.tolerance is None) == (self.fixed_iterations is None):
            raise ValueError("exactly one of tolerance / fixed_iterations must be set")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.fixed_iterations is not None and self.fixed_iterations < 1:
            raise ValueError("fixed_iterations must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.fixed_iterations is not None and self.fixed_iterations > self.max_iterations:
            raise ValueError("fixed_iterations exceeds max_iterations")


@dataclass(frozen=True)
class GibbsKernel:
    """exp(-lam * M) restricted to the positive-mass rows of the source.

    ``entries`` has one row per positive source bin (ordered by
    ``support_index``) and all d columns; ``cost_rows`` keeps the matching
    rows of the cost matrix for the final cost evaluation.
    """

    entries: np.ndarray
    support_index: np.ndarray
    lam: float
    cost_rows: np.ndarray = field(repr=False, default=None)
    _cache: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def dim(self) -> int:
        return self.entries.shape[1]

    @property
    def support_size(self) -> int:
        return self.entries.shape[0]

    @property
    def cost_weighted(self) -> np.ndarray:
        """Entrywise kernel * cost product, built once per kernel."""
        km = self._cache.get("km")
        if km is None:
            km = self.entries * self.cost_rows
            self._cache["km"] = km
        return km

    @property
    def transposed(self) -> np.ndarray:
        """Contiguous transpose of the kernel, built once per kernel."""
        kt = self._cache.get("kt")
        if kt is None:
            kt = np.ascontiguousarray(self.entries.T)
            self._cache["kt"] = kt
        return kt


def gibbs_kernel(M: CostMatrix, lam: float, r: Histogram) -> GibbsKernel:
    """Build the scaled kernel for a source histogram.

    Raises KernelUnderflowError if any column of the restricted kernel falls
    entirely below float64 range, naming the lam * max(M) product that caused
    it.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lam must be a positive real, got {lam!r}")
    if M.dim != r.dim:
        raise ValueError(f"cost matrix dim {M.dim} does not match histogram dim {r.dim}")
    support = np.flatnonzero(r.weights > 0)
    cost_rows = M.entries[support, :]
    entries = np.exp(-lam * cost_rows)
    weakest = entries.max(axis=0).min()
    if weakest < UNDERFLOW_FLOOR:
        raise KernelUnderflowError(
            f"kernel column underflow: lam * max(M) = {lam * float(M.entries.max()):g} "
            f"drives exp(-lam * M) below {UNDERFLOW_FLOOR:g}; "
            "lower lam or median-normalize the cost matrix"
        )
    return GibbsKernel(entries=entries, support_index=support, lam=lam, cost_rows=cost_rows)


@dataclass(frozen=True)
class SinkhornResult:
    """Scaling vectors and divergence value for one source/target pair.

    ``u`` lives on the positive-mass rows of the source (length matching the
    kernel support); ``v`` has full target length. The implied plan is
    diag(u) K diag(v). ``row_marginal_violation`` is the max-norm gap between
    that plan's row sums and the source weights, reported for diagnostics;
    column sums are exact by the final v update.
    """

    u: np.ndarray
    v: np.ndarray
    divergence: float
    iterations: int
    converged: bool
    row_marginal_violation: float


def _check_kernel(kernel: GibbsKernel, M: CostMatrix, lam: float, r: Histogram) -> GibbsKernel:
    if kernel is None:
        return gibbs_kernel(M, lam, r)
    if kernel.lam != lam:
        raise ValueError(f"kernel was built for lam={kernel.lam!r}, config says {lam!r}")
    if kernel.dim != r.dim:
        raise ValueError("kernel dimension does not match histogram dimension")
    support = np.flatnonzero(r.weights > 0)
    if not np.array_equal(support, kernel.support_index):
        raise ValueError("kernel support does not match the source histogram")
    return kernel


def sinkhorn_divergence(
    r: Histogram,
    c: Histogram,
    M: CostMatrix,
    cfg: SinkhornConfig,
    kernel: GibbsKernel | None = None,
    x0: np.ndarray | None = None,
) -> SinkhornResult:
    """Entropic transport divergence between two histograms.

    Runs the scaling fixed point x <- diag(1/r) K (c / (K^T (1/x))) from the
    uniform start (or ``x0``, which only changes the iteration count, not the
    limit), then evaluates sum(u * ((K o M) v)). A prebuilt ``kernel`` for
    the same (M, lam, r) may be supplied to amortize the exponential.
    """
    if c.dim != M.dim:
        raise ValueError(f"target dim {c.dim} does not match cost matrix dim {M.dim}")
    kernel = _check_kernel(kernel, M, cfg.lam, r)
    results = _scale_block(kernel, r, c.weights[:, None], cfg, x0)
    return results[0]


def sinkhorn_batch(
    r: Histogram,
    targets: np.ndarray,
    M: CostMatrix,
    cfg: SinkhornConfig,
    kernel: GibbsKernel | None = None,
) -> list[SinkhornResult]:
    """Divergences from one source to each column of ``targets``.

    Columns are independent problems sharing the kernel; each column is
    frozen at the exact iterate where its own stopping rule fires, so the
    results match per-column single calls up to matmul rounding. The block
    keeps iterating until every column has stopped.
    """
    C = np.asarray(targets, dtype=np.float64)
    if C.ndim != 2:
        raise ValueError("targets must be a (dim, n) matrix of histogram columns")
    if C.shape[0] != M.dim:
        raise ValueError(f"target rows {C.shape[0]} do not match cost matrix dim {M.dim}")
    if not np.all(np.isfinite(C)) or np.any(C < 0):
        raise ValueError("target columns must be finite nonnegative histograms")
    sums = C.sum(axis=0)
    off = np.flatnonzero(np.abs(sums - 1.0) > 1e-9)
    if off.size:
        raise ValueError(
            f"target column {int(off[0])} sums to {sums[off[0]]!r}, expected 1"
        )
    kernel = _check_kernel(kernel, M, cfg.lam, r)
    return _scale_block(kernel, r, C, cfg, None)


def _check_finite(X, active, lam, iteration, n):
    """Raise on the first column whose iterate left the float range."""
    colwise = np.isfinite(X).all(axis=0)
    if not colwise.all():
        bad = int(active[np.flatnonzero(~colwise)[0]])
        raise NonFiniteIterateError(lam, iteration, bad if n > 1 else None)


def _apply_update_numpy(buf, x_cur, inv, r_sub, relative):
    """One pass turning the gemm output into the next iterate.

    ``buf`` holds K @ (c / (K^T inv)) on entry and is scratch on exit;
    ``x_cur`` and ``inv`` are updated in place; returns the squared change
    norm per column (relative per entry when ``relative``).
    """
    np.divide(buf, r_sub[:, None], out=buf)
    diff = x_cur
    np.subtract(buf, x_cur, out=diff)
    if relative:
        np.divide(diff, buf, out=diff)
    delta2 = np.einsum("ij,ij->j", diff, diff)
    x_cur[:] = buf
    np.divide(1.0, buf, out=inv)
    return delta2


if _njit is not None:

    @_njit(cache=True)
    def _apply_update(buf, x_cur, inv, r_sub, relative):  # pragma: no cover
        s, m = buf.shape
        delta2 = np.zeros(m)
        for i in range(s):
            ri = r_sub[i]
            for j in range(m):
                xn = buf[i, j] / ri
                d = xn - x_cur[i, j]
                if relative:
                    d /= xn
                delta2[j] += d * d
                x_cur[i, j] = xn
                inv[i, j] = 1.0 / xn
        return delta2

else:  # pragma: no cover - numba is a declared dependency
    _apply_update = _apply_update_numpy


def _scale_block(
    kernel: GibbsKernel,
    r: Histogram,
    C: np.ndarray,
    cfg: SinkhornConfig,
    x0: np.ndarray | None,
) -> list[SinkhornResult]:
    K = kernel.entries
    Kt = kernel.transposed
    r_sub = r.weights[kernel.support_index]
    s, n = K.shape[0], C.shape[1]

    if x0 is None:
        X = np.full((s, n), 1.0 / s)
    else:
        x0 = np.asarray(x0, dtype=np.float64)
        if x0.shape not in ((s,), (s, n)):
            raise ValueError(f"warm start must have shape ({s},) or ({s}, {n})")
        if not (np.all(np.isfinite(x0)) and np.all(x0 > 0)):
            raise ValueError("warm start must be strictly positive and finite")
        X = np.tile(x0[:, None], (1, n)) if x0.ndim == 1 else x0.copy()

    active = np.arange(n)
    X_final = np.empty_like(X)
    iters_final = np.zeros(n, dtype=np.int64)
    conv_final = np.zeros(n, dtype=bool)
    # NaN marks "no rate estimate yet"; a single-step rate can look spuriously
    # small (e.g. right after a warm start), so the corrected rule demands two
    # consecutive passes before declaring the tail under control
    prev_delta = np.full(n, np.nan)
    tail_passes = np.zeros(n, dtype=np.int8)

    limit = cfg.fixed_iterations if cfg.fixed_iterations is not None else cfg.max_iterations
    iteration = 0
    # the active-column slice and the gemm scratch only change when columns
    # freeze, so they live outside the iteration; the iterate and its
    # reciprocal are updated in place by one fused pass per iteration
    C_active = np.ascontiguousarray(C)
    inv = 1.0 / X
    buf = np.empty_like(X)
    G = np.empty((C.shape[0], n))
    # overflow is detected and raised explicitly, so keep numpy quiet here
    uniform_start = x0 is None
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        while active.size and iteration < limit:
            iteration += 1
            if uniform_start and iteration == 1 and active.size > 1:
                # every column starts at the same iterate, so the first
                # back-substitution is one matvec broadcast across columns
                G[:] = (Kt @ inv[:, 0])[:, None]
            else:
                np.matmul(Kt, inv, out=G)
            np.divide(C_active, G, out=G)
            np.matmul(K, G, out=buf)
            delta = np.sqrt(_apply_update(buf, X, inv, r_sub, cfg.tail_corrected))
            if not np.all(np.isfinite(delta)):
                _check_finite(X, active, cfg.lam, iteration, n)
            if cfg.fixed_iterations is not None:
                continue
            if cfg.tail_corrected:
                rho = delta / prev_delta[active]  # NaN until two steps seen
                rho = np.where(rho < 1.0, rho, np.nan)
                tail = delta * rho / (1.0 - rho)
                # a bitwise-stationary iterate has no tail to estimate
                step_pass = (delta <= cfg.tolerance) & (
                    (tail <= cfg.tolerance) | (delta == 0.0)
                )
                tail_passes[active] = np.where(step_pass, tail_passes[active] + 1, 0)
                done = tail_passes[active] >= 2  # NaN comparisons reset passes
                prev_delta[active] = delta
            else:
                done = delta <= cfg.tolerance
            if np.any(done):
                cols = active[done]
                X_final[:, cols] = X[:, done]
                iters_final[cols] = iteration
                conv_final[cols] = True
                active = active[~done]
                keep = ~done
                X = np.ascontiguousarray(X[:, keep])
                inv = np.ascontiguousarray(inv[:, keep])
                C_active = np.ascontiguousarray(C_active[:, keep])
                buf = np.empty_like(X)
                G = np.empty((C.shape[0], active.size))
        if active.size:
            _check_finite(X, active, cfg.lam, iteration, n)

    if cfg.fixed_iterations is not None:
        X_final[:, active] = X
        iters_final[active] = iteration
        conv_final[active] = iteration == cfg.fixed_iterations
    elif active.size:
        # tolerance never met within the cap; report the last iterate
        X_final[:, active] = X
        iters_final[active] = iteration
        conv_final[active] = False

    if not np.all(X_final > 0):
        bad = int(np.flatnonzero(~(X_final > 0).all(axis=0))[0])
        raise NonFiniteIterateError(cfg.lam, int(iters_final[bad]), bad if n > 1 else None)
    U = 1.0 / X_final
    V = C / (Kt @ U)
    divergences = np.einsum("ij,ij->j", U, kernel.cost_weighted @ V)
    row_violations = np.max(np.abs(U * (K @ V) - r_sub[:, None]), axis=0)
    U_rows = np.ascontiguousarray(U.T)
    V_rows = np.ascontiguousarray(V.T)
    return [
        SinkhornResult(
            u=U_rows[j],
            v=V_rows[j],
            divergence=float(divergences[j]),
            iterations=int(iters_final[j]),
            converged=bool(conv_final[j]),
            row_marginal_violation=float(row_violations[j]),
        )
        for j in range(n)
    ]


def recover_plan(result: SinkhornResult, kernel: GibbsKernel) -> TransportPlan:
    """Materialize diag(u) K diag(v) with zero rows for dropped source bins.

    The plan is invariant under the (u, v) -> (s u, v / s) gauge freedom of
    the scaling pair. Column sums equal the target exactly; row sums match
    the source to within the solve tolerance.
    """
    if result.u.shape[0] != kernel.support_size:
        raise ValueError("result and kernel disagree on source support size")
    d = kernel.dim
    plan = np.zeros((d, d))
    plan[kernel.support_index, :] = result.u[:, None] * kernel.entries * result.v[None, :]
    return TransportPlan(plan)
