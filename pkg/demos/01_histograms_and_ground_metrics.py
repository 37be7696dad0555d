"""Build histograms on the simplex and ground metrics over their bins.

Histograms are the objects being compared; the ground metric prices moving
mass between bins. Every distance in this package is parameterized by that
metric, which is what separates transport distances from bin-by-bin ones.
"""

import numpy as np

from sinkdist import (
    entropy,
    grid_euclidean_metric,
    image_to_histogram,
    median_normalize,
    normalize,
    power_transform,
    random_points_metric,
    sample_simplex,
    validate_metric_cone,
)

# --- histograms -----------------------------------------------------------

counts = normalize([12, 0, 3, 9])
print("normalized counts:", counts.weights, "entropy:", f"{entropy(counts):.4f} nats")

uniform_draw = sample_simplex(5, seed=7)
print("uniform simplex draw:", np.round(uniform_draw.weights, 4))

image = np.zeros((4, 4))
image[1:3, 1:3] = [[4, 1], [1, 4]]
hist = image_to_histogram(image)
print("image histogram (row-major bins):", np.round(hist.weights, 3))

# --- ground metrics -------------------------------------------------------

grid = grid_euclidean_metric(4, 4)
print("\n4x4 pixel grid metric:", grid.dim, "bins,",
      "max distance", f"{grid.entries.max():.4f},",
      "validated:", grid.validated_metric)

report = validate_metric_cone(grid)
print("cone check passed:", report.passed, "| violations:", report.violation_count)

# fractional powers keep the metric property and flatten large distances
flattened = power_transform(grid, 0.5)
print("after sqrt transform, max distance:", f"{flattened.entries.max():.4f},",
      "still validated:", flattened.validated_metric)

# random Gaussian-point metrics, median-normalized for scale-free solvers
random_metric = median_normalize(random_points_metric(30, seed=3))
print("random 30-bin metric median:", np.median(random_metric.entries))
