import numpy as np
import pytest

from sinkdist import (
    AlphaBall,
    CostMatrix,
    Histogram,
    bandwidth_grid,
    baseline_distance,
    grid_euclidean_metric,
    independence_kernel_distance,
    independence_precompute,
    kernel_matrix,
    sample_simplex,
    sinkhorn_alpha,
)

DISJOINT = (Histogram([1, 0]), Histogram([0, 1]))


class TestBaselines:
    @pytest.mark.parametrize("kind", ["hellinger", "chi2", "total_variation", "squared_euclidean"])
    def test_zero_on_equal(self, kind, rng):
        r = Histogram(rng.dirichlet(np.ones(6)))
        assert baseline_distance(kind, r, r) == 0.0

    @pytest.mark.parametrize(
        "kind,expected",
        [
            ("hellinger", 2.0),
            ("chi2", 2.0),
            ("total_variation", 1.0),
            ("squared_euclidean", 2.0),
        ],
    )
    def test_disjoint_support_values(self, kind, expected):
        assert baseline_distance(kind, *DISJOINT) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("kind", ["hellinger", "chi2", "total_variation", "squared_euclidean"])
    def test_symmetric(self, kind, rng):
        for _ in range(25):
            r = Histogram(rng.dirichlet(np.ones(5)))
            c = Histogram(rng.dirichlet(np.ones(5)))
            assert baseline_distance(kind, r, c) == pytest.approx(
                baseline_distance(kind, c, r), abs=1e-15
            )

    def test_total_variation_triangle(self, rng):
        for _ in range(200):
            x, y, z = (Histogram(rng.dirichlet(np.ones(4))) for _ in range(3))
            dxz = baseline_distance("total_variation", x, z)
            dxy = baseline_distance("total_variation", x, y)
            dyz = baseline_distance("total_variation", y, z)
            assert dxz <= dxy + dyz + 1e-12

    def test_chi2_handles_shared_empty_bins(self):
        r = Histogram([0.5, 0.5, 0.0])
        c = Histogram([0.25, 0.75, 0.0])
        assert np.isfinite(baseline_distance("chi2", r, c))

    def test_unknown_kind(self, rng):
        r = Histogram(rng.dirichlet(np.ones(3)))
        with pytest.raises(ValueError):
            baseline_distance("manhattan", r, r)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            baseline_distance("hellinger", Histogram([1.0]), Histogram([0.5, 0.5]))


class TestIndependenceKernel:
    def test_uniform_swap_value(self, swap_metric):
        h = Histogram([0.5, 0.5])
        assert independence_kernel_distance(h, h, swap_metric) == pytest.approx(0.5)

    def test_positive_self_distance(self, swap_metric):
        # no coincidence axiom: spread-out mass pays the product coupling
        h = Histogram([0.5, 0.5])
        assert independence_kernel_distance(h, h, swap_metric) > 0

    def test_bilinear_in_first_argument(self, rng, small_metric):
        c = Histogram(rng.dirichlet(np.ones(8)))
        r1 = Histogram(rng.dirichlet(np.ones(8)))
        r2 = Histogram(rng.dirichlet(np.ones(8)))
        for a in (0.0, 0.3, 0.7, 1.0):
            mix = Histogram(a * r1.weights + (1 - a) * r2.weights)
            expected = a * independence_kernel_distance(
                r1, c, small_metric
            ) + (1 - a) * independence_kernel_distance(r2, c, small_metric)
            assert independence_kernel_distance(mix, c, small_metric) == pytest.approx(
                expected, abs=1e-12
            )

    def test_matches_zero_budget_solver(self, rng, small_metric):
        r = Histogram(rng.dirichlet(np.ones(8)))
        c = Histogram(rng.dirichlet(np.ones(8)))
        rep = sinkhorn_alpha(r, c, small_metric, AlphaBall(0.0))
        assert rep.value == pytest.approx(
            independence_kernel_distance(r, c, small_metric), abs=1e-8
        )


def squared_grid(w, h):
    g = grid_euclidean_metric(w, h)
    return CostMatrix(g.entries**2)


class TestPrecompute:
    def test_reconstruction_identity(self):
        M = squared_grid(4, 4)
        pre = independence_precompute(M)
        gram = pre.cholesky_L @ pre.cholesky_L.T
        recon = pre.norms_u[:, None] + pre.norms_u[None, :] - 2 * gram
        assert np.max(np.abs(recon - M.entries)) < 1e-8

    def test_fast_path_matches_bilinear_form(self, rng):
        M = squared_grid(5, 5)
        pre = independence_precompute(M)
        for _ in range(50):
            r = Histogram(rng.dirichlet(np.ones(25)))
            c = Histogram(rng.dirichlet(np.ones(25)))
            assert pre.fast_distance(r, c) == pytest.approx(
                independence_kernel_distance(r, c, M), abs=1e-10
            )

    def test_unsquared_grid_also_accepted(self, rng):
        # fractional powers of an EDM stay an EDM; plain grid distances pass
        M = grid_euclidean_metric(4, 4)
        pre = independence_precompute(M)
        r = Histogram(rng.dirichlet(np.ones(16)))
        c = Histogram(rng.dirichlet(np.ones(16)))
        assert pre.fast_distance(r, c) == pytest.approx(
            independence_kernel_distance(r, c, M), abs=1e-10
        )

    def test_gram_is_psd_after_clipping(self):
        pre = independence_precompute(squared_grid(4, 4))
        eigs = np.linalg.eigvalsh(pre.cholesky_L @ pre.cholesky_L.T)
        assert eigs.min() >= -1e-10

    def test_factor_is_lower_triangular(self):
        L = independence_precompute(squared_grid(3, 3)).cholesky_L
        assert np.allclose(L, np.tril(L))

    def test_non_edm_rejected(self):
        # squared line distances with one entry bent far off the embedding
        line = np.abs(np.arange(5, dtype=float)[:, None] - np.arange(5)[None, :])
        entries = line**2
        entries[0, 4] = entries[4, 0] = 0.1
        with pytest.raises(ValueError, match="eigenvalue"):
            independence_precompute(CostMatrix(entries))

    def test_gram_kernel_positive_definite(self, rng):
        # exp(-t r^T M c) over histogram sets has no significantly negative modes
        M = squared_grid(4, 4)
        hists = [sample_simplex(16, seed=s) for s in range(40)]
        for t in (0.1, 1.0, 10.0):
            G = np.array(
                [
                    [
                        np.exp(-t * independence_kernel_distance(a, b, M))
                        for b in hists
                    ]
                    for a in hists
                ]
            )
            assert np.linalg.eigvalsh(G).min() >= -1e-8


class TestKernelMatrix:
    def test_zero_distances_give_ones(self):
        km = kernel_matrix(np.zeros((4, 4)), t=2.0)
        assert np.allclose(km.entries, 1.0 + km.diagonal_regularizer * np.eye(4))

    def test_output_symmetric(self, rng):
        D = np.abs(rng.normal(size=(6, 6)))
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0)
        km = kernel_matrix(D, t=1.0)
        assert np.max(np.abs(km.entries - km.entries.T)) < 1e-12

    def test_random_tables_repaired_to_psd(self, rng):
        for _ in range(50):
            D = np.abs(rng.normal(size=(8, 8))) * 5
            D = 0.5 * (D + D.T)
            np.fill_diagonal(D, 0)
            km = kernel_matrix(D, t=0.5)
            assert np.linalg.eigvalsh(km.entries).min() >= -1e-10

    def test_regularizer_engages_on_indefinite_kernel(self):
        # bins 1 and 2 nearly coincide with bin 0 yet sit far apart, a gross
        # triangle violation whose exponentiated kernel is indefinite
        near, far = -np.log(0.99), -np.log(0.01)
        D = np.array([[0, near, near], [near, 0, far], [near, far, 0]])
        raw = np.exp(-D)
        assert np.linalg.eigvalsh(raw).min() < -1e-10
        km = kernel_matrix(D, t=1.0)
        assert km.diagonal_regularizer > 0
        assert np.linalg.eigvalsh(km.entries).min() >= -1e-10

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            kernel_matrix(np.array([[0, 1.0], [2.0, 0]]), t=1.0)

    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            kernel_matrix(np.zeros((2, 2)), t=0.0)


class TestBandwidthGrid:
    def test_interpolated_quantiles(self):
        grid = bandwidth_grid(np.arange(1, 101, dtype=float))
        assert grid == pytest.approx([1.0, 10.9, 20.8, 50.5])

    def test_constant_sample(self):
        assert bandwidth_grid([5, 5, 5]) == [1.0, 5.0, 5.0, 5.0]

    def test_single_element(self):
        assert bandwidth_grid([3.0]) == [1.0, 3.0, 3.0, 3.0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bandwidth_grid([])
