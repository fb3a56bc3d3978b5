import numpy as np
import pytest
from scipy import optimize

from bregman_stationarity.errors import DimensionError
from bregman_stationarity.utils.nnls import nnls


@pytest.mark.parametrize("seed", range(10))
def test_matches_scipy_when_all_unknowns_are_nonnegative(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((8, 5))
    b = rng.standard_normal(8)
    x, rnorm, _ = nnls(A, b)
    expected, expected_rnorm = optimize.nnls(A, b)
    np.testing.assert_allclose(x, expected, atol=1e-8)
    assert rnorm == pytest.approx(expected_rnorm, abs=1e-8)
    assert np.all(x >= 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_matches_lstsq_when_all_unknowns_are_free(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((8, 4))
    b = rng.standard_normal(8)
    x, rnorm, _ = nnls(A, b, k=0)
    expected = np.linalg.lstsq(A, b, rcond=None)[0]
    np.testing.assert_allclose(x, expected, atol=1e-9)
    assert rnorm == pytest.approx(np.linalg.norm(A @ expected - b), abs=1e-9)


def test_mixed_bounds():
    # x0 >= 0 wants to be -1, x1 is free
    A = np.eye(2)
    x, rnorm, _ = nnls(A, [-1.0, -2.0], k=1)
    np.testing.assert_allclose(x, [0.0, -2.0], atol=1e-12)
    assert rnorm == pytest.approx(1.0)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        nnls(np.eye(2), [1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        nnls(np.eye(2), [1.0, 2.0], k=3)
