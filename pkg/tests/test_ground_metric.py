import numpy as np
import pytest

from sinkdist import (
    CostMatrix,
    grid_euclidean_metric,
    median_normalize,
    power_transform,
    random_points_metric,
    validate_metric_cone,
)


class TestValidateMetricCone:
    def test_two_point_metric_passes(self):
        assert validate_metric_cone(np.array([[0, 1], [1, 0]])).passed

    def test_nonzero_diagonal_fails(self):
        report = validate_metric_cone(np.array([[0.5, 1], [1, 0]]))
        assert not report.passed
        assert not report.diagonal_ok

    def test_triangle_violation_reported(self):
        m = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], dtype=float)
        report = validate_metric_cone(m)
        assert not report.passed
        assert (0, 2, 1) in report.violations  # m[0,2]=3 > m[0,1]+m[1,2]=2
        assert report.violation_count > 0

    def test_asymmetry_fails(self):
        m = np.array([[0, 1], [2, 0]], dtype=float)
        assert not validate_metric_cone(m).symmetric

    def test_violation_list_is_capped(self):
        m = np.ones((6, 6)) * 10
        np.fill_diagonal(m, 0)
        m[0, :] = m[:, 0] = 1.0  # every pair has a shortcut through bin 0
        m[0, 0] = 0.0
        report = validate_metric_cone(m, max_violations=3)
        assert len(report.violations) == 3
        assert report.violation_count == 20

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            validate_metric_cone(np.zeros((2, 3)))


class TestGridEuclidean:
    def test_two_by_one(self):
        m = grid_euclidean_metric(2, 1)
        assert np.array_equal(m.entries, [[0, 1], [1, 0]])

    def test_two_by_two_diagonals(self):
        m = grid_euclidean_metric(2, 2).entries
        assert m[0, 1] == pytest.approx(1.0)
        assert m[0, 2] == pytest.approx(1.0)
        assert m[0, 3] == pytest.approx(np.sqrt(2))

    def test_twenty_grid_corner_distance(self):
        m = grid_euclidean_metric(20, 20)
        assert m.dim == 400
        assert m.entries.max() == pytest.approx(np.sqrt(19**2 + 19**2), abs=1e-9)
        assert m.validated_metric

    def test_rejects_zero_size(self):
        with pytest.raises(ValueError):
            grid_euclidean_metric(0, 5)

    def test_grid_always_passes_cone_check(self):
        for w, h in [(1, 1), (3, 2), (5, 5)]:
            assert validate_metric_cone(grid_euclidean_metric(w, h)).passed


class TestPowerTransform:
    def test_identity_at_one(self):
        m = grid_euclidean_metric(3, 1)
        assert np.array_equal(power_transform(m, 1.0).entries, m.entries)

    def test_square_root(self):
        m = CostMatrix([[0, 4], [4, 0]])
        assert np.array_equal(power_transform(m, 0.5).entries, [[0, 2], [2, 0]])

    @pytest.mark.parametrize("a", [0.0, -0.5, 1.5])
    def test_rejects_bad_exponent(self, a):
        with pytest.raises(ValueError):
            power_transform(CostMatrix([[0, 1], [1, 0]]), a)

    def test_preserves_metric_cone(self):
        for seed in range(10):
            m = random_points_metric(12, seed)
            assert m.validated_metric
            for a in (0.1, 0.5, 0.9):
                out = power_transform(m, a)
                assert validate_metric_cone(out).passed

    def test_monotone_in_exponent_above_one(self):
        m = CostMatrix(np.array([[0, 2, 3], [2, 0, 5], [3, 5, 0]], dtype=float))
        lo = power_transform(m, 0.3).entries
        hi = power_transform(m, 0.8).entries
        off = ~np.eye(3, dtype=bool)
        assert np.all(lo[off] <= hi[off])


class TestRandomPointsMetric:
    def test_zero_diagonal_and_symmetric(self):
        m = random_points_metric(30, seed=0).entries
        assert np.all(np.diag(m) == 0)
        assert np.array_equal(m, m.T)

    def test_deterministic_per_seed(self):
        assert np.array_equal(
            random_points_metric(15, seed=9).entries,
            random_points_metric(15, seed=9).entries,
        )

    def test_rejects_tiny_dimension(self):
        with pytest.raises(ValueError):
            random_points_metric(1, seed=0)

    @pytest.mark.slow
    def test_cone_check_passes_many_seeds(self):
        for seed in range(100):
            assert random_points_metric(20, seed).validated_metric


class TestMedianNormalize:
    def test_scale_invariance(self):
        m = random_points_metric(10, seed=4)
        scaled = CostMatrix(3.7 * m.entries)
        assert np.allclose(
            median_normalize(m).entries, median_normalize(scaled).entries, atol=1e-15
        )

    def test_output_median_is_one(self):
        m = median_normalize(random_points_metric(25, seed=8))
        assert np.median(m.entries) == pytest.approx(1.0)

    def test_hand_computed_order_statistics(self):
        entries = np.array([[0, 2, 4], [2, 0, 6], [4, 6, 0]], dtype=float)
        out = median_normalize(CostMatrix(entries))
        # all nine entries sorted: 0,0,0,2,2,4,4,6,6 -> median 2
        assert np.allclose(out.entries, entries / 2)

    def test_idempotent(self):
        m = median_normalize(random_points_metric(12, seed=2))
        again = median_normalize(m)
        assert np.allclose(m.entries, again.entries, atol=1e-15)

    def test_zero_median_raises(self):
        # five of nine entries are zero, so the all-entries median is zero
        entries = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=float)
        with pytest.raises(ValueError):
            median_normalize(CostMatrix(entries))
