import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sinkdist import Histogram, entropy, image_to_histogram, normalize, sample_simplex

positive_vectors = arrays(
    np.float64,
    st.integers(1, 20),
    elements=st.floats(0, 1e6, allow_nan=False, allow_infinity=False),
).filter(lambda v: v.sum() > 0)


def test_normalize_symmetric_pair():
    h = normalize([2, 2])
    assert np.allclose(h.weights, [0.5, 0.5])


def test_normalize_single_support():
    assert np.allclose(normalize([0, 5]).weights, [0, 1])


def test_normalize_rejects_empty_mass():
    with pytest.raises(ValueError):
        normalize([0, 0])


def test_normalize_rejects_negative():
    with pytest.raises(ValueError):
        normalize([1, -0.5])


@given(positive_vectors)
@settings(max_examples=200)
def test_normalize_sums_to_one_and_is_idempotent(v):
    h = normalize(v)
    assert abs(h.weights.sum() - 1.0) < 1e-12
    again = normalize(h.weights)
    assert np.array_equal(again.weights, h.weights)


@given(positive_vectors)
@settings(max_examples=200)
def test_entropy_bounds(v):
    h = normalize(v)
    val = entropy(h)
    assert -1e-12 <= val <= np.log(h.dim) + 1e-12


@pytest.mark.parametrize(
    "weights,expected",
    [
        ([0.5, 0.5], np.log(2)),
        ([1.0, 0.0], 0.0),
        ([0.25] * 4, np.log(4)),
    ],
)
def test_entropy_known_values(weights, expected):
    assert entropy(Histogram(weights)) == pytest.approx(expected, abs=1e-12)


def test_histogram_rejects_bad_sum():
    with pytest.raises(ValueError):
        Histogram([0.5, 0.6])


def test_sample_simplex_degenerate_dimension():
    assert sample_simplex(1, seed=7).weights.tolist() == [1.0]


def test_sample_simplex_normalization_large_d():
    h = sample_simplex(1000, seed=3)
    assert abs(h.weights.sum() - 1.0) < 1e-12


def test_sample_simplex_seed_determinism():
    a = sample_simplex(10, seed=5)
    b = sample_simplex(10, seed=5)
    c = sample_simplex(10, seed=6)
    assert np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.weights, c.weights)


def test_sample_simplex_rejects_zero_dim():
    with pytest.raises(ValueError):
        sample_simplex(0, seed=1)


@pytest.mark.slow
def test_sample_simplex_mean_is_uniform():
    # law of large numbers against the analytic mean (1/3, 1/3, 1/3)
    draws = np.stack([sample_simplex(3, seed=s).weights for s in range(100_000)])
    assert np.all(np.abs(draws.mean(axis=0) - 1 / 3) < 0.01)


def test_image_to_histogram_constant_image():
    h = image_to_histogram(np.full((20, 20), 7.0))
    assert np.allclose(h.weights, 1 / 400)


def test_image_to_histogram_single_bright_pixel():
    img = np.zeros((4, 4))
    img[2, 1] = 3.0
    h = image_to_histogram(img)
    expected = np.zeros(16)
    expected[2 * 4 + 1] = 1.0  # row-major flattening
    assert np.array_equal(h.weights, expected)


def test_image_to_histogram_rejects_zero_image():
    with pytest.raises(ValueError):
        image_to_histogram(np.zeros((3, 3)))
