import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dtw_by_enumeration, ewma_recurrence
from tsadbench.exceptions import EmptyIntersection, EmptySequence, LengthMismatch, ShapeMismatch
from tsadbench.primitives.error_functions import (
    ErrorSeries, combine_errors_product, dtw_distance, product_of_errors, reconstruction_errors,
    regression_errors)

short_floats = st.lists(st.floats(-10, 10), min_size=1, max_size=7)


# -- regression errors ------------------------------------------------------------

def test_regression_errors_zero_when_exact():
    y = np.array([1.0, -2.0, 3.0])
    assert regression_errors(y, y, [0, 1, 2]).errors.tolist() == [0, 0, 0]


def test_regression_errors_span_one_is_raw_residual():
    out = regression_errors([0, 0, 10, 0], [0, 0, 0, 0], [0, 1, 2, 3], smoothing_window=1)
    assert out.errors.tolist() == [0, 0, 10, 0]


def test_regression_errors_span_three_matches_recurrence():
    out = regression_errors([0, 0, 10, 0], [0, 0, 0, 0], [0, 1, 2, 3], smoothing_window=3)
    np.testing.assert_allclose(out.errors, ewma_recurrence([0, 0, 10, 0], 3))
    np.testing.assert_allclose(out.errors, [0, 0, 5, 2.5])


def test_regression_errors_multichannel_mean():
    y = np.array([[1.0, 2.0], [0.0, 0.0]])
    out = regression_errors(y, np.zeros_like(y), [5, 6])
    assert out.errors.tolist() == [1.5, 0.0]


def test_regression_errors_length_check():
    with pytest.raises(LengthMismatch):
        regression_errors([1, 2], [1, 2, 3], [0, 1])


# -- reconstruction errors --------------------------------------------------------

@pytest.mark.parametrize("method", ["point", "area", "dtw"])
def test_reconstruction_identical_is_zero(method):
    X = np.random.default_rng(0).normal(size=(6, 4))
    out = reconstruction_errors(X, X, np.arange(9), method=method, window=3)
    assert np.all(out.errors == 0)


def test_reconstruction_point_single_window():
    out = reconstruction_errors(np.array([[1.0, 3.0]]), np.zeros((1, 2)), [10, 11])
    assert out.errors.tolist() == [1, 3]


def test_reconstruction_area_interior_value():
    X = np.zeros((20, 4))
    out = reconstruction_errors(X, np.ones_like(X), np.arange(23), method="area", window=4)
    assert np.all(out.errors[2:-2] == 3.0)


def test_reconstruction_point_is_mean_over_covering_windows():
    rng = np.random.default_rng(4)
    X, X_hat = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    out = reconstruction_errors(X, X_hat, np.arange(7))
    diff = np.abs(X - X_hat)
    # sample 2 is covered by window 0 at offset 2, window 1 at offset 1, window 2 at offset 0
    assert out.errors[2] == pytest.approx(np.mean([diff[0, 2], diff[1, 1], diff[2, 0]]))


def test_reconstruction_point_permutation_invariant():
    rng = np.random.default_rng(5)
    X, X_hat = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    base = reconstruction_errors(X, X_hat, np.arange(7)).errors
    # reversing time visits the covering windows of every sample in the opposite order
    flipped = reconstruction_errors(X[::-1, ::-1], X_hat[::-1, ::-1], np.arange(7)).errors
    np.testing.assert_allclose(base, flipped[::-1])


def test_reconstruction_shape_checks():
    with pytest.raises(ShapeMismatch):
        reconstruction_errors(np.zeros((3, 2)), np.zeros((3, 3)), np.arange(4))
    with pytest.raises(ShapeMismatch):
        reconstruction_errors(np.zeros((3, 2)), np.zeros((3, 2)), np.arange(3))
    with pytest.raises(ValueError):
        reconstruction_errors(np.zeros((3, 2)), np.zeros((3, 2)), np.arange(4), method="max")


# -- dynamic time warping ---------------------------------------------------------

def test_dtw_absorbs_repeat():
    assert dtw_distance([1, 2, 3], [1, 2, 2, 3]) == 0


def test_dtw_empty():
    with pytest.raises(EmptySequence):
        dtw_distance([], [1.0])


@settings(max_examples=100)
@given(short_floats, short_floats)
def test_dtw_matches_enumeration_and_is_symmetric(a, b):
    d = dtw_distance(a, b)
    assert d == pytest.approx(dtw_by_enumeration(a, b), abs=1e-9)
    assert d == pytest.approx(dtw_distance(b, a), abs=1e-9)
    assert dtw_distance(a, a) == 0


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-10, 10), min_size=n, max_size=n),
    st.lists(st.floats(-10, 10), min_size=n, max_size=n))))
def test_dtw_bounded_by_identity_path(pair):
    a, b = pair
    assert dtw_distance(a, b) <= np.abs(np.subtract(a, b)).sum() + 1e-9


# -- product combination ----------------------------------------------------------

def test_product_elementwise():
    out = product_of_errors(ErrorSeries([0, 1], [1, 2]), ErrorSeries([0, 1], [3, 4]))
    assert out.errors.tolist() == [3, 8]


def test_product_single_input_identity():
    e = ErrorSeries([3, 4, 5], [0.5, 1.0, 2.0])
    out = combine_errors_product([e])
    assert out.index.tolist() == [3, 4, 5] and out.errors.tolist() == [0.5, 1.0, 2.0]


def test_product_aligns_on_common_index_and_zero_annihilates():
    a = ErrorSeries([0, 1, 2, 3], [1, 2, 3, 4])
    b = ErrorSeries([2, 3, 4], [0, 5, 6])
    out = combine_errors_product([a, b])
    assert out.index.tolist() == [2, 3] and out.errors.tolist() == [0, 20]


def test_product_empty_intersection():
    with pytest.raises(EmptyIntersection):
        product_of_errors(ErrorSeries([0], [1]), ErrorSeries([1], [1]))


def test_error_series_rejects_negative():
    with pytest.raises(ValueError):
        ErrorSeries([0], [-1.0])
