import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lstmcast.errors import DegenerateScalerWarning, EmptyDatasetError, TooFewRowsError
from lstmcast.preprocess import (
    ScalerParams,
    SplitSpec,
    chrono_split,
    fit_scaler,
    inverse_transform,
    make_windows,
    transform,
)

GTB_OPENS = [2.26, 2.35, 2.38, 2.40, 2.46]


def test_fit_scaler_on_open_prices():
    p = fit_scaler(GTB_OPENS, ["open"])
    assert (p.min[0], p.max[0]) == (2.26, 2.46)
    assert not p.degenerate.any()


def test_constant_and_single_value_are_degenerate():
    assert fit_scaler([5.0, 5.0, 5.0]).degenerate.all()
    p = fit_scaler([3.5])
    assert p.min[0] == p.max[0] == 3.5 and p.degenerate.all()


def test_fit_scaler_empty():
    with pytest.raises(EmptyDatasetError):
        fit_scaler(np.empty(0))


def test_transform_examples():
    p = ScalerParams(np.array([0.0]), np.array([10.0]), ("x",))
    assert transform(p, np.array([5.0]))[0] == 0.5
    q = fit_scaler(GTB_OPENS)
    assert transform(q, np.array([2.46]))[0] == 1.0


def test_transform_does_not_clip():
    p = ScalerParams(np.array([0.0]), np.array([10.0]), ("x",))
    np.testing.assert_array_equal(transform(p, np.array([-5.0, 15.0])), [-0.5, 1.5])


def test_degenerate_scaler_maps_to_zero_and_back_with_warning():
    p = fit_scaler([5.0, 5.0])
    with pytest.warns(DegenerateScalerWarning):
        assert transform(p, np.array([5.0, 7.0])).tolist() == [0.0, 0.0]
    with pytest.warns(DegenerateScalerWarning):
        assert inverse_transform(p, np.array([0.3])).tolist() == [5.0]


def test_roundtrip_open_prices():
    p = fit_scaler(GTB_OPENS)
    x = np.array(GTB_OPENS)
    np.testing.assert_allclose(inverse_transform(p, transform(p, x)), x, rtol=1e-12, atol=0)


@given(arrays(np.float64, (20, 3), elements=st.floats(-1e4, 1e4)))
def test_roundtrip_multifeature(x):
    p = fit_scaler(x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateScalerWarning)
        back = inverse_transform(p, transform(p, x))
    live = ~p.degenerate
    np.testing.assert_allclose(back[:, live], x[:, live], rtol=1e-12, atol=1e-12 * np.abs(x).max())


def test_train_fit_leaves_train_in_unit_interval():
    rng = np.random.default_rng(3)
    series = np.cumsum(rng.normal(size=300)) + 50
    train, test = chrono_split(series, SplitSpec(0.8), 10)
    p = fit_scaler(train)
    s = transform(p, train)
    assert s.min() == 0.0 and s.max() == 1.0
    # test values can fall outside; they must pass through unchanged
    np.testing.assert_allclose(transform(p, test), (test - train.min()) / (train.max() - train.min()))


def test_scaler_dict_roundtrip():
    p = fit_scaler(np.array([[1.0, 2.0], [3.0, 5.0]]), ["open", "close"])
    assert ScalerParams.from_dict(p.to_dict()) == p


@pytest.mark.parametrize("n, fraction, expected", [(5081, 0.8, (4064, 1017)), (10, 0.8, (8, 2))])
def test_chrono_split_counts(n, fraction, expected):
    train, test = chrono_split(list(range(n)), SplitSpec(fraction))
    assert (len(train), len(test)) == expected
    assert train + test == list(range(n))


def test_chrono_split_too_few_rows():
    with pytest.raises(TooFewRowsError):
        chrono_split([1, 2, 3], SplitSpec(0.8), window_length=30)


def test_split_fraction_bounds():
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            SplitSpec(bad)
    assert SplitSpec().train_fraction == 0.8


@given(st.integers(2, 500), st.floats(0.05, 0.95))
def test_chrono_split_preserves_count(n, fraction):
    train, test = chrono_split(list(range(n)), SplitSpec(fraction))
    assert len(train) + len(test) == n
    assert len(train) == int(np.floor(n * fraction))


def test_window_counts():
    assert len(make_windows(np.linspace(0, 1, 100), 30)) == 70
    assert len(make_windows(np.linspace(0, 1, 4064), 30)) == 4034


def test_window_enumeration():
    ds = make_windows(np.array([0.0, 0.5, 1.0]), 2)
    assert ds.inputs.shape == (1, 2, 1)
    assert ds.inputs[0, :, 0].tolist() == [0.0, 0.5]
    assert ds.targets.tolist() == [1.0]
    assert ds.positions.tolist() == [2]


def test_window_too_short():
    with pytest.raises(TooFewRowsError):
        make_windows(np.arange(5.0), 5)


def test_windows_overlap_and_target_alignment():
    x = np.random.default_rng(0).random((50, 2))
    ds = make_windows(x, 7, ["open", "close"])
    for i in range(len(ds) - 1):
        np.testing.assert_array_equal(ds.inputs[i][-1], ds.inputs[i + 1][-2])
    np.testing.assert_array_equal(ds.targets, x[7:, 1])


def test_windows_with_training_context():
    train = np.arange(10.0)
    test = np.arange(10.0, 15.0)
    ds = make_windows(test, 3, context=train)
    assert len(ds) == 5
    assert ds.positions.tolist() == [0, 1, 2, 3, 4]
    assert ds.inputs[0, :, 0].tolist() == [7.0, 8.0, 9.0]
    assert ds.targets[0] == 10.0


def test_windows_carry_dates():
    dates = [f"d{i}" for i in range(6)]
    ds = make_windows(np.arange(6.0), 4, dates=dates)
    assert ds.dates == ("d4", "d5")
