import numpy as np
import pytest

from sinkdist import read_results_csv
from sinkdist.cli import main
from sinkdist.experiments import (
    make_synthetic_labeled_set,
    run_gap_experiment,
    run_iterations_experiment,
    run_knn_eval,
    run_pairwise,
    run_timing_experiment,
)


class TestGapExperiment:
    def test_cardinality_and_schema(self):
        records = run_gap_experiment(12, 4, [1, 5, 20], seed=3)
        assert len(records) == 12
        assert {r.method for r in records} == {"sinkhorn"}
        assert {r.lam for r in records} == {1.0, 5.0, 20.0}

    def test_gaps_nonnegative(self):
        records = run_gap_experiment(12, 6, [1, 5, 20], seed=4)
        assert all(r.value >= -1e-10 for r in records)

    def test_median_gap_shrinks(self):
        records = run_gap_experiment(16, 10, [1, 50], seed=5)
        lo = np.median([r.value for r in records if r.lam == 1.0])
        hi = np.median([r.value for r in records if r.lam == 50.0])
        assert hi < lo

    def test_values_reproducible(self):
        a = run_gap_experiment(10, 3, [2, 9], seed=6)
        b = run_gap_experiment(10, 3, [2, 9], seed=6)
        assert [r.value for r in a] == [r.value for r in b]

    def test_empty_lambdas_rejected(self):
        with pytest.raises(ValueError):
            run_gap_experiment(10, 3, [], seed=1)

    def test_unsorted_lambdas_rejected(self):
        with pytest.raises(ValueError):
            run_gap_experiment(10, 3, [5, 1], seed=1)


class TestTimingExperiment:
    def test_cardinality_matches_grid(self):
        records = run_timing_experiment([16, 24], ["emd", "sinkhorn"], [1, 9], 5, seed=1)
        timed = [r for r in records if r.experiment == "bench"]
        summaries = [r for r in records if r.experiment.startswith("bench_")]
        assert len(timed) == 2 * (1 + 2) * 5
        assert len(summaries) == 2 * 3 * 2  # mean + median per config

    def test_values_reproducible_times_not_asserted(self):
        a = run_timing_experiment([16], ["sinkhorn"], [9], 3, seed=2)
        b = run_timing_experiment([16], ["sinkhorn"], [9], 3, seed=2)
        av = [r.value for r in a if r.experiment == "bench"]
        bv = [r.value for r in b if r.experiment == "bench"]
        assert av == bv

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            run_timing_experiment([16], ["emd", "quantum"], [1], 2, seed=0)


class TestIterationsExperiment:
    def test_iterations_grow_with_lam(self):
        records = run_iterations_experiment([32], [1, 50], trials=5, seed=7)
        lo = np.mean([r.value for r in records if r.lam == 1.0])
        hi = np.mean([r.value for r in records if r.lam == 50.0])
        assert hi > lo
        assert all(r.iterations >= 1 for r in records)

    def test_fixed_seed_reproduces_counts(self):
        a = run_iterations_experiment([16], [1, 9], trials=3, seed=8)
        b = run_iterations_experiment([16], [1, 9], trials=3, seed=8)
        assert [r.iterations for r in a] == [r.iterations for r in b]


class TestKnnEval:
    def test_synthetic_cardinality(self):
        methods = ["sinkhorn", "emd", "hellinger", "tv", "chi2", "sqeuclid", "independence"]
        records = run_knn_eval(
            subset_size=60, methods=methods, folds=4, seed=1, synthetic=True, synthetic_dim=16
        )
        per_fold = [r for r in records if r.experiment == "knn"]
        summaries = [r for r in records if r.experiment in ("knn_mean", "knn_std")]
        assert len(per_fold) == len(methods) * 4
        assert len(summaries) == len(methods) * 2

    def test_error_rates_in_unit_interval(self):
        records = run_knn_eval(
            subset_size=40, methods=["sqeuclid", "tv"], folds=2, seed=3, synthetic=True,
            synthetic_dim=12,
        )
        assert all(0.0 <= r.value <= 1.0 for r in records)

    def test_structured_classes_beat_chance(self):
        records = run_knn_eval(
            subset_size=80, methods=["sqeuclid"], folds=4, seed=5, synthetic=True,
            synthetic_dim=16,
        )
        mean = [r for r in records if r.experiment == "knn_mean"][0].value
        assert mean < 0.5  # ten classes, chance is 0.9

    def test_sinkhorn_lambda_chosen_from_grid(self):
        records = run_knn_eval(
            subset_size=40, methods=["sinkhorn"], folds=2, seed=2, synthetic=True,
            synthetic_dim=12, fixed_iters=5,
        )
        lams = {r.lam for r in records if r.experiment == "knn"}
        assert lams  # one chosen per fold
        assert all(l is not None for l in lams)

    def test_requires_paths_without_synthetic(self):
        with pytest.raises(ValueError):
            run_knn_eval(subset_size=10, methods=["tv"], folds=2, seed=0, synthetic=False)

    def test_ingested_digits_roundtrip(self, tmp_path):
        from sinkdist import write_idx_images, write_idx_labels

        rng = np.random.default_rng(0)
        grids = [rng.integers(0, 255, size=(6, 6)).astype(np.uint8) for _ in range(30)]
        write_idx_images(tmp_path / "i.idx", grids)
        write_idx_labels(tmp_path / "l.idx", rng.integers(0, 3, size=30).tolist())
        records = run_knn_eval(
            images_path=tmp_path / "i.idx",
            labels_path=tmp_path / "l.idx",
            subset_size=20,
            methods=["tv", "emd"],
            folds=2,
            seed=4,
            crop_to=None,
        )
        assert all(r.dimension == 36 for r in records)


class TestSyntheticData:
    def test_deterministic(self):
        a = make_synthetic_labeled_set(20, 8, 4, seed=9)
        b = make_synthetic_labeled_set(20, 8, 4, seed=9)
        assert a.labels == b.labels
        assert all(
            np.array_equal(x.weights, y.weights) for x, y in zip(a.histograms, b.histograms)
        )

    def test_labels_within_class_count(self):
        data = make_synthetic_labeled_set(50, 8, 4, seed=10)
        assert set(data.labels) <= set(range(4))


class TestPairwise:
    def test_batch_method_count(self):
        records = run_pairwise(dim=12, count=9, method="sinkhorn", lam=5.0, seed=1)
        assert len(records) == 8
        assert all(r.method == "sinkhorn" for r in records)

    def test_alpha_method(self):
        records = run_pairwise(dim=10, count=3, method="alpha", lam=None, seed=2, alpha=0.2)
        assert len(records) == 2
        assert all(r.value >= 0 for r in records)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            run_pairwise(dim=10, count=3, method="warp", lam=None, seed=0)


class TestCli:
    def test_gap_writes_csv(self, tmp_path):
        out = tmp_path / "gap.csv"
        code = main(
            ["gap", "--dim", "10", "--pairs", "2", "--lambdas", "1,9", "--seed", "1",
             "--out", str(out)]
        )
        assert code == 0
        rows = read_results_csv(out)
        assert len(rows) == 4

    def test_usage_error_empty_lambdas(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gap", "--lambdas", "", "--dim", "10", "--pairs", "1"])
        assert exc.value.code == 2

    def test_usage_error_unknown_bench_method(self):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--methods", "emd,warp", "--dims", "16", "--trials", "1"])
        assert exc.value.code == 2

    def test_usage_error_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == 2

    def test_runtime_error_exit_code(self, tmp_path, capsys):
        code = main(["knn", "--images", "/nonexistent.idx", "--labels", "/missing.idx",
                     "--subset", "5"])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_knn_requires_files_or_synthetic(self):
        with pytest.raises(SystemExit) as exc:
            main(["knn", "--subset", "10"])
        assert exc.value.code == 2

    def test_iters_stdout(self, capsys):
        code = main(["iters", "--dims", "12", "--lambdas", "1,5", "--trials", "1", "--seed", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("experiment,dimension,lambda,method")
        assert len(out.strip().splitlines()) == 3

    def test_pairwise_fixed_iters(self, tmp_path):
        out = tmp_path / "pw.csv"
        code = main(
            ["pairwise", "--dim", "10", "--count", "4", "--method", "sinkhorn",
             "--lambda", "7", "--fixed-iters", "12", "--out", str(out)]
        )
        assert code == 0
        rows = read_results_csv(out)
        assert all(r.iterations == 12 for r in rows)

    def test_synthetic_knn_runs(self, tmp_path):
        out = tmp_path / "knn.csv"
        code = main(
            ["knn", "--synthetic", "--subset", "24", "--folds", "2",
             "--methods", "tv,sqeuclid", "--seed", "3", "--out", str(out)]
        )
        assert code == 0
        rows = read_results_csv(out)
        assert any(r.experiment == "knn_mean" for r in rows)
