import numpy as np
import pytest

from sinkdist import CostMatrix, Histogram, median_normalize, random_points_metric


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_metric():
    """A validated, median-normalized random metric on 8 bins."""
    return median_normalize(random_points_metric(8, seed=42))


@pytest.fixture
def swap_metric():
    return CostMatrix([[0.0, 1.0], [1.0, 0.0]], validated_metric=True)


def random_histogram(rng, d):
    return Histogram(rng.dirichlet(np.ones(d)))
