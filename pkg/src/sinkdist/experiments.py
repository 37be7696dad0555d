"""Desk-scale benchmark experiments emitting deterministic CSV records.

Each experiment draws all randomness from a single seed, so the ``value``
columns of its records are reproducible run to run; wall-clock columns are
not. Synthetic inputs are uniform-simplex histograms with median-normalized
random-point metrics, so nothing here needs dataset files.
"""

from __future__ import annotations

import time

import numpy as np

from .alpha_sinkhorn import sinkhorn_alpha
from .dataset_io import ExperimentRecord, LabeledHistogramSet, load_labeled_histograms
from .emd import pairwise_emd_costs, solve_emd
from .ground_metric import (
    grid_euclidean_metric,
    median_normalize,
    power_transform,
    random_points_metric,
)
from .histograms import Histogram
from .kernels import baseline_distance, independence_kernel_distance
from .sinkhorn import SinkhornConfig, gibbs_kernel, sinkhorn_batch, sinkhorn_divergence

__all__ = [
    "run_gap_experiment",
    "run_timing_experiment",
    "run_iterations_experiment",
    "run_knn_eval",
    "run_pairwise",
    "make_synthetic_labeled_set",
    "KNN_METHODS",
]

#: regularization grid for the digit experiment, in units of 1/q50 of the
#: pixel-distance median; the middle values tend to win model selection
KNN_LAMBDA_STEPS = (5.0, 7.0, 9.0, 11.0)

_BASELINE_TOKENS = {
    "hellinger": "hellinger",
    "tv": "total_variation",
    "chi2": "chi2",
    "sqeuclid": "squared_euclidean",
}

KNN_METHODS = ("sinkhorn", "emd", "independence") + tuple(_BASELINE_TOKENS)


def _spawn_ints(seed: int, n: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2**63 - 1, size=n)


def _sample_pair(d: int, rng: np.random.Generator) -> tuple[Histogram, Histogram]:
    return Histogram(rng.dirichlet(np.ones(d))), Histogram(rng.dirichlet(np.ones(d)))


def run_gap_experiment(
    dim: int,
    num_pairs: int,
    lambda_list,
    seed: int,
    tolerance: float = 1e-6,
) -> list[ExperimentRecord]:
    """Relative gap between the regularized divergence and the exact cost.

    One record per (pair, lam) holds (divergence - exact) / exact. The solve
    tolerance defaults tighter than the timing experiments so that gaps at
    large lam reflect the regularization, not iteration noise.
    """
    lams = [float(x) for x in lambda_list]
    if not lams:
        raise ValueError("lambda list must not be empty")
    if sorted(lams) != lams:
        raise ValueError("lambda list must be ascending")
    rng = np.random.default_rng(seed)
    metric = median_normalize(random_points_metric(dim, int(_spawn_ints(seed, 1)[0])))
    records = []
    for _ in range(num_pairs):
        r, c = _sample_pair(dim, rng)
        exact = solve_emd(r, c, metric).cost
        for lam in lams:
            cfg = SinkhornConfig(lam=lam, tolerance=tolerance)
            t0 = time.perf_counter()
            res = sinkhorn_divergence(r, c, metric, cfg)
            wall = (time.perf_counter() - t0) * 1e3
            records.append(
                ExperimentRecord(
                    experiment="gap",
                    dimension=dim,
                    lam=lam,
                    method="sinkhorn",
                    seed=seed,
                    value=(res.divergence - exact) / exact,
                    wall_time_ms=wall,
                    iterations=res.iterations,
                )
            )
    return records


def run_timing_experiment(
    dims_list,
    methods,
    lambda_list,
    trials: int,
    seed: int,
    tolerance: float = 0.01,
) -> list[ExperimentRecord]:
    """Wall time per solve for the exact solver and the scaling solver.

    Each (dim, method-or-lam, trial) yields one record whose value is the
    computed distance; a warm-up solve per configuration is excluded from
    timing. Summary rows carry the mean and median of the timed trials.
    """
    methods = list(methods)
    unknown = set(methods) - {"emd", "sinkhorn"}
    if unknown:
        raise ValueError(f"unknown timing methods: {sorted(unknown)}")
    lams = [float(x) for x in lambda_list]
    if "sinkhorn" in methods and not lams:
        raise ValueError("lambda list must not be empty when timing sinkhorn")
    records: list[ExperimentRecord] = []
    summaries: list[ExperimentRecord] = []
    for dim in dims_list:
        dim = int(dim)
        metric_seed, pair_seed = (int(s) for s in _spawn_ints(seed ^ dim, 2))
        metric = median_normalize(random_points_metric(dim, metric_seed, validate=False))
        rng = np.random.default_rng(pair_seed)
        pairs = [_sample_pair(dim, rng) for _ in range(trials)]

        configs: list[tuple[str, float | None]] = []
        if "emd" in methods:
            configs.append(("emd", None))
        if "sinkhorn" in methods:
            configs.extend(("sinkhorn", lam) for lam in lams)

        for method, lam in configs:
            walls = []
            _time_one(method, lam, pairs[0], metric, tolerance)  # warm-up
            for r, c in pairs:
                value, wall, iters = _time_one(method, lam, (r, c), metric, tolerance)
                walls.append(wall)
                records.append(
                    ExperimentRecord(
                        experiment="bench",
                        dimension=dim,
                        lam=lam,
                        method=method,
                        seed=seed,
                        value=value,
                        wall_time_ms=wall,
                        iterations=iters,
                    )
                )
            for stat_name, stat in (("bench_mean_ms", np.mean), ("bench_median_ms", np.median)):
                summaries.append(
                    ExperimentRecord(
                        experiment=stat_name,
                        dimension=dim,
                        lam=lam,
                        method=method,
                        seed=seed,
                        value=float(stat(walls)),
                        wall_time_ms=float(stat(walls)),
                        iterations=None,
                    )
                )
    return records + summaries


def _time_one(method, lam, pair, metric, tolerance):
    r, c = pair
    if method == "emd":
        t0 = time.perf_counter()
        sol = solve_emd(r, c, metric)
        return sol.cost, (time.perf_counter() - t0) * 1e3, None
    cfg = SinkhornConfig(lam=lam, tolerance=tolerance)
    t0 = time.perf_counter()
    res = sinkhorn_divergence(r, c, metric, cfg)
    return res.divergence, (time.perf_counter() - t0) * 1e3, res.iterations


def run_iterations_experiment(
    dims_list,
    lambda_list,
    trials: int,
    seed: int,
    tolerance: float = 0.01,
) -> list[ExperimentRecord]:
    """Iterations to convergence as a function of the regularization strength."""
    lams = [float(x) for x in lambda_list]
    if not lams:
        raise ValueError("lambda list must not be empty")
    records = []
    for dim in dims_list:
        dim = int(dim)
        metric_seed, pair_seed = (int(s) for s in _spawn_ints(seed ^ dim, 2))
        metric = median_normalize(random_points_metric(dim, metric_seed, validate=False))
        rng = np.random.default_rng(pair_seed)
        for trial in range(trials):
            r, c = _sample_pair(dim, rng)
            for lam in lams:
                cfg = SinkhornConfig(lam=lam, tolerance=tolerance)
                t0 = time.perf_counter()
                res = sinkhorn_divergence(r, c, metric, cfg)
                wall = (time.perf_counter() - t0) * 1e3
                records.append(
                    ExperimentRecord(
                        experiment="iters",
                        dimension=dim,
                        lam=lam,
                        method="sinkhorn",
                        seed=seed,
                        value=float(res.iterations),
                        wall_time_ms=wall,
                        iterations=res.iterations,
                    )
                )
    return records


def make_synthetic_labeled_set(
    n: int, dim: int, classes: int, seed: int
) -> LabeledHistogramSet:
    """Class-structured histograms for running the classifier without files.

    Each class has a simplex prototype; samples mix the prototype with fresh
    Dirichlet noise, so nearest-neighbor structure exists but is noisy.
    """
    rng = np.random.default_rng(seed)
    prototypes = rng.dirichlet(np.ones(dim), size=classes)
    histograms = []
    labels = []
    for _ in range(n):
        k = int(rng.integers(classes))
        noise = rng.dirichlet(np.ones(dim))
        histograms.append(Histogram(0.7 * prototypes[k] + 0.3 * noise))
        labels.append(k)
    return LabeledHistogramSet(
        histograms=histograms, labels=labels, source=f"synthetic:seed={seed}"
    )


def _nn_error(D: np.ndarray, labels: np.ndarray, train_idx, test_idx) -> float:
    sub = D[np.ix_(test_idx, train_idx)]
    pred = labels[np.asarray(train_idx)[np.argmin(sub, axis=1)]]
    return float(np.mean(pred != labels[test_idx]))


def _sinkhorn_distance_matrix(weights, metric, lam, fixed_iters):
    """Pairwise divergences over one histogram set at a fixed iteration count.

    Only the upper triangle is solved (the divergence is symmetric for a
    symmetric metric up to iteration noise) and mirrored for determinism.
    """
    n = len(weights)
    W = np.column_stack(weights)
    cfg = SinkhornConfig(
        lam=lam, tolerance=None, fixed_iterations=fixed_iters, max_iterations=fixed_iters
    )
    D = np.zeros((n, n))
    for i in range(n - 1):
        r = Histogram(weights[i])
        kernel = gibbs_kernel(metric, lam, r)
        results = sinkhorn_batch(r, W[:, i + 1 :], metric, cfg, kernel=kernel)
        row = np.array([res.divergence for res in results])
        D[i, i + 1 :] = row
        D[i + 1 :, i] = row
    return D


def _pairwise_baseline_matrix(kind: str, weights) -> np.ndarray:
    W = np.stack(weights)
    if kind == "squared_euclidean":
        sq = (W**2).sum(axis=1)
        return np.maximum(sq[:, None] + sq[None, :] - 2 * W @ W.T, 0.0)
    if kind == "hellinger":
        S = np.sqrt(W)
        sq = (S**2).sum(axis=1)
        return np.maximum(sq[:, None] + sq[None, :] - 2 * S @ S.T, 0.0)
    if kind == "total_variation":
        return 0.5 * np.abs(W[:, None, :] - W[None, :, :]).sum(axis=2)
    if kind == "chi2":
        num = (W[:, None, :] - W[None, :, :]) ** 2
        den = W[:, None, :] + W[None, :, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        return terms.sum(axis=2)
    raise ValueError(f"unknown baseline {kind!r}")


def run_knn_eval(
    images_path=None,
    labels_path=None,
    subset_size: int = 500,
    methods=KNN_METHODS,
    folds: int = 4,
    seed: int = 0,
    synthetic: bool = False,
    crop_to: int | None = 20,
    power_a: float = 1.0,
    fixed_iters: int = 20,
    synthetic_dim: int = 64,
) -> list[ExperimentRecord]:
    """1-nearest-neighbor classification error per distance method.

    Folds follow a 1-train / (folds-1)-test split. The regularization for the
    scaling solver is picked per fold from a grid scaled by the median
    pixel distance, using a held-out half of the training fold; solves run a
    fixed iteration count. Per-fold records are followed by mean/std summary
    rows per method.
    """
    methods = list(methods)
    unknown = set(methods) - set(KNN_METHODS)
    if unknown:
        raise ValueError(f"unknown knn methods: {sorted(unknown)}")
    if folds < 2:
        raise ValueError("need at least 2 folds")

    if synthetic:
        data = make_synthetic_labeled_set(subset_size, synthetic_dim, 10, seed)
        metric = median_normalize(
            random_points_metric(synthetic_dim, int(_spawn_ints(seed, 1)[0]))
        )
    else:
        if images_path is None or labels_path is None:
            raise ValueError("images/labels paths are required unless synthetic=True")
        data = load_labeled_histograms(images_path, labels_path, crop_to=crop_to)
        if len(data) < subset_size:
            raise ValueError(f"dataset holds {len(data)} usable items < subset {subset_size}")
        height, width = data.grid_shape
        metric = grid_euclidean_metric(width, height)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(data))[:subset_size]
    weights = [data.histograms[i].weights for i in order]
    labels = np.array([data.labels[i] for i in order])
    n = len(weights)
    d = weights[0].size

    # pixel-median scale for the regularization grid (distinct pairs only)
    upper = metric.entries[np.triu_indices(metric.dim, k=1)]
    q50 = float(np.median(upper))
    lambda_grid = [step / q50 for step in KNN_LAMBDA_STEPS]

    fold_of = np.arange(n) % folds
    fold_assign = fold_of[rng.permutation(n)]

    matrices: dict[str, np.ndarray] = {}
    for method in methods:
        if method == "sinkhorn":
            for lam in lambda_grid:
                matrices[f"sinkhorn:{lam}"] = _sinkhorn_distance_matrix(
                    weights, metric, lam, fixed_iters
                )
        elif method == "emd":
            matrices["emd"] = pairwise_emd_costs(weights, metric)
        elif method == "independence":
            Ma = power_transform(metric, power_a).entries
            W = np.stack(weights)
            matrices["independence"] = W @ Ma @ W.T
        else:
            matrices[method] = _pairwise_baseline_matrix(_BASELINE_TOKENS[method], weights)

    records = []
    errors: dict[str, list[float]] = {m: [] for m in methods}
    for fold in range(folds):
        train_idx = np.flatnonzero(fold_assign == fold)
        test_idx = np.flatnonzero(fold_assign != fold)
        half = len(train_idx) // 2
        tune_fit, tune_val = train_idx[:half], train_idx[half:]
        for method in methods:
            t0 = time.perf_counter()
            lam_used = None
            if method == "sinkhorn":
                tune_errors = [
                    _nn_error(matrices[f"sinkhorn:{lam}"], labels, tune_fit, tune_val)
                    for lam in lambda_grid
                ]
                lam_used = lambda_grid[int(np.argmin(tune_errors))]
                err = _nn_error(matrices[f"sinkhorn:{lam_used}"], labels, train_idx, test_idx)
            else:
                err = _nn_error(matrices[method], labels, train_idx, test_idx)
            wall = (time.perf_counter() - t0) * 1e3
            errors[method].append(err)
            records.append(
                ExperimentRecord(
                    experiment="knn",
                    dimension=d,
                    lam=lam_used,
                    method=method,
                    seed=seed,
                    value=err,
                    wall_time_ms=wall,
                    iterations=fixed_iters if method == "sinkhorn" else None,
                )
            )
    for method in methods:
        for stat_name, stat in (("knn_mean", np.mean), ("knn_std", np.std)):
            records.append(
                ExperimentRecord(
                    experiment=stat_name,
                    dimension=d,
                    lam=None,
                    method=method,
                    seed=seed,
                    value=float(stat(errors[method])),
                    wall_time_ms=0.0,
                    iterations=None,
                )
            )
    return records


def run_pairwise(
    dim: int,
    count: int,
    method: str,
    lam: float | None,
    seed: int,
    tolerance: float = 0.01,
    fixed_iters: int | None = None,
    alpha: float | None = None,
) -> list[ExperimentRecord]:
    """Distances from one sampled histogram to a family of others.

    Exercises the batched scaling path when ``method`` is sinkhorn; other
    methods loop pairwise. ``alpha`` selects the entropy-constrained solver.
    """
    if count < 2:
        raise ValueError("need at least 2 histograms")
    rng = np.random.default_rng(seed)
    metric = median_normalize(random_points_metric(dim, int(_spawn_ints(seed, 1)[0])))
    hists = [Histogram(rng.dirichlet(np.ones(dim))) for _ in range(count)]
    source, rest = hists[0], hists[1:]
    records = []

    if method == "sinkhorn":
        if lam is None:
            raise ValueError("sinkhorn needs a lam value")
        if fixed_iters is not None:
            cfg = SinkhornConfig(
                lam=lam, tolerance=None, fixed_iterations=fixed_iters, max_iterations=fixed_iters
            )
        else:
            cfg = SinkhornConfig(lam=lam, tolerance=tolerance)
        C = np.column_stack([h.weights for h in rest])
        t0 = time.perf_counter()
        results = sinkhorn_batch(source, C, metric, cfg)
        wall = (time.perf_counter() - t0) * 1e3 / len(results)
        for res in results:
            records.append(
                ExperimentRecord(
                    "pairwise", dim, lam, "sinkhorn", seed, res.divergence, wall, res.iterations
                )
            )
        return records

    for other in rest:
        t0 = time.perf_counter()
        if method == "emd":
            value = solve_emd(source, other, metric).cost
        elif method == "independence":
            value = independence_kernel_distance(source, other, metric)
        elif method == "alpha":
            if alpha is None:
                raise ValueError("alpha method needs an alpha value")
            value = sinkhorn_alpha(source, other, metric, alpha).value
        elif method in _BASELINE_TOKENS:
            value = baseline_distance(_BASELINE_TOKENS[method], source, other)
        else:
            raise ValueError(f"unknown pairwise method {method!r}")
        wall = (time.perf_counter() - t0) * 1e3
        records.append(
            ExperimentRecord("pairwise", dim, lam, method, seed, value, wall, None)
        )
    return records
