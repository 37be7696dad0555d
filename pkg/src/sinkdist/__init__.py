"""Entropic-regularized optimal transport distances for histograms.

The package covers the exact transportation distance (network simplex), the
regularized divergence computed by Sinkhorn-Knopp matrix scaling, the hard
entropy-constrained distance found by bisection on the regularization
strength, the independence kernel with its Gram-factor fast path, classic
histogram baselines, IDX dataset ingestion, and seeded benchmark experiments.
"""

from .alpha_sinkhorn import (
    AlphaSolveReport,
    coincidence_wrapped_distance,
    entropy_target,
    sinkhorn_alpha,
)
from .dataset_io import (
    ExperimentRecord,
    IdxFormatError,
    LabeledHistogramSet,
    center_crop,
    load_labeled_histograms,
    read_idx_images,
    read_idx_labels,
    read_results_csv,
    write_idx_images,
    write_idx_labels,
    write_results_csv,
)
from .emd import EmdSolution, SimplexStallError, pairwise_emd_costs, solve_emd
from .ground_metric import (
    CostMatrix,
    MetricConeReport,
    grid_euclidean_metric,
    median_normalize,
    power_transform,
    random_points_metric,
    validate_metric_cone,
)
from .histograms import Histogram, entropy, image_to_histogram, normalize, sample_simplex
from .kernels import (
    IndependenceKernelPrecompute,
    KernelMatrix,
    bandwidth_grid,
    baseline_distance,
    independence_kernel_distance,
    independence_precompute,
    kernel_matrix,
)
from .plans import (
    AlphaBall,
    TransportPlan,
    glue,
    in_alpha_ball,
    independence_table,
    mutual_information,
    plan_entropy,
)
from .sinkhorn import (
    GibbsKernel,
    KernelUnderflowError,
    NonFiniteIterateError,
    SinkhornConfig,
    SinkhornResult,
    gibbs_kernel,
    recover_plan,
    sinkhorn_batch,
    sinkhorn_divergence,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaBall",
    "AlphaSolveReport",
    "CostMatrix",
    "EmdSolution",
    "ExperimentRecord",
    "GibbsKernel",
    "Histogram",
    "IdxFormatError",
    "IndependenceKernelPrecompute",
    "KernelMatrix",
    "KernelUnderflowError",
    "LabeledHistogramSet",
    "MetricConeReport",
    "NonFiniteIterateError",
    "SimplexStallError",
    "SinkhornConfig",
    "SinkhornResult",
    "TransportPlan",
    "bandwidth_grid",
    "baseline_distance",
    "center_crop",
    "coincidence_wrapped_distance",
    "entropy",
    "entropy_target",
    "gibbs_kernel",
    "glue",
    "grid_euclidean_metric",
    "image_to_histogram",
    "in_alpha_ball",
    "independence_kernel_distance",
    "independence_precompute",
    "independence_table",
    "kernel_matrix",
    "load_labeled_histograms",
    "median_normalize",
    "mutual_information",
    "normalize",
    "pairwise_emd_costs",
    "plan_entropy",
    "power_transform",
    "random_points_metric",
    "read_idx_images",
    "read_idx_labels",
    "read_results_csv",
    "recover_plan",
    "sample_simplex",
    "sinkhorn_alpha",
    "sinkhorn_batch",
    "sinkhorn_divergence",
    "solve_emd",
    "validate_metric_cone",
    "write_idx_images",
    "write_idx_labels",
    "write_results_csv",
]
