"""Seeded benchmark experiments, from Python or the command line.

Each experiment emits flat records with deterministic value columns; the CLI
wraps the same functions and writes CSV. This script runs desk-scale
versions of all of them.

Equivalent shell commands:

    sinkdist gap   --dim 32 --pairs 10 --lambdas 1,5,20 --seed 1 --out gap.csv
    sinkdist bench --dims 32,64 --methods emd,sinkhorn --lambdas 1,9 --trials 3 --seed 1
    sinkdist iters --dims 64 --lambdas 1,5,20 --trials 5 --seed 1
    sinkdist knn   --synthetic --subset 60 --folds 4 --seed 1 --out knn.csv
    sinkdist pairwise --dim 32 --count 8 --method sinkhorn --lambda 9 --seed 1
"""

import numpy as np

from sinkdist.experiments import (
    run_gap_experiment,
    run_iterations_experiment,
    run_knn_eval,
    run_timing_experiment,
)

# gap to the exact cost shrinks as lam grows
records = run_gap_experiment(dim=32, num_pairs=10, lambda_list=[1, 5, 20], seed=1)
for lam in (1.0, 5.0, 20.0):
    gaps = [r.value for r in records if r.lam == lam]
    print(f"lam {lam:5.0f}: median relative gap {np.median(gaps):.4f}")

# wall-time comparison: scaling vs exact
records = run_timing_experiment([32, 64], ["emd", "sinkhorn"], [9], trials=3, seed=1)
for r in records:
    if r.experiment == "bench_mean_ms":
        lam = f" lam={r.lam:.0f}" if r.lam else ""
        print(f"dim {r.dimension:3d} {r.method + lam:>14}: {r.value:8.2f} ms mean")

# iteration counts grow with lam at fixed tolerance
records = run_iterations_experiment([64], [1, 5, 20, 50], trials=5, seed=1)
for lam in (1.0, 5.0, 20.0, 50.0):
    iters = [r.iterations for r in records if r.lam == lam]
    print(f"lam {lam:5.0f}: mean iterations {np.mean(iters):7.1f}")

# nearest-neighbor ranking of the distances on synthetic labeled data
records = run_knn_eval(subset_size=60, folds=4, seed=1, synthetic=True, synthetic_dim=16)
print("\n1-NN mean error per method:")
for r in records:
    if r.experiment == "knn_mean":
        print(f"  {r.method:>13}: {r.value:.3f}")
