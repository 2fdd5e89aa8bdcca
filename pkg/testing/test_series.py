from fractions import Fraction

import numpy as np
import pytest

from pivotfpe.exceptions import InvalidSeries
from pivotfpe.exceptions import LagOutOfRange
from pivotfpe.exceptions import NotSymmetric
from pivotfpe.exceptions import SeriesParseError
from pivotfpe.series import autocov_centered
from pivotfpe.series import autocov_path
from pivotfpe.series import autocov_seq
from pivotfpe.series import autocov_table
from pivotfpe.series import crosscov_path
from pivotfpe.series import crosscov_seq
from pivotfpe.series import crosscov_table
from pivotfpe.series import LambdaGrid
from pivotfpe.series import MultiSeries
from pivotfpe.series import read_series_csv
from pivotfpe.series import TimeSeries
from pivotfpe.series import unvech
from pivotfpe.series import vech
from pivotfpe.series import write_series_csv


X = (1.0, 2.0, 3.0, 4.0)


@pytest.mark.parametrize(
    "h, lam, expected",
    [
        (0, 0, 0.0),
        (1, 1, 5.0),
        (1, 0.5, 0.5),
        (1, Fraction(1, 2), 0.5),
        (-1, 1, 5.0),
        (0, 1, 7.5),
    ],
)
def test_autocov_seq(h, lam, expected):
    assert autocov_seq(X, h, lam) == pytest.approx(expected)


@pytest.mark.parametrize(
    "x, expected",
    [
        ((1.0, -1.0, 1.0, -1.0), 1.0),
        (X, 1.25),
        ((3.0, 3.0, 3.0), 0.0),
    ],
)
def test_autocov_centered_lag_zero(x, expected):
    assert autocov_centered(x, 0) == pytest.approx(expected)


def test_autocov_centered_constant_any_lag():
    for h in range(4):
        assert autocov_centered([2.5] * 5, h) == 0.0


def test_autocov_seq_lag_out_of_range():
    with pytest.raises(LagOutOfRange):
        autocov_seq(X, 4)


def test_autocov_seq_lambda_out_of_range():
    with pytest.raises(ValueError):
        autocov_seq(X, 0, 1.5)


def test_autocov_path_half_grid():
    for grid in (LambdaGrid([Fraction(1, 2), 1]), LambdaGrid([0.5, 1.0])):
        path = autocov_path(X, 1, grid)
        assert path.values.tolist() == pytest.approx([0.5, 5.0])
        assert path.value_at_zero == 0.0


def test_autocov_path_single_point_grid():
    path = autocov_path(X, 2, LambdaGrid([1]))
    assert path.values.tolist() == [autocov_seq(X, 2)]


def test_autocov_path_zero_series():
    assert not np.any(autocov_path(np.zeros(50), 3).values)


def test_autocov_path_matches_pointwise(rng):
    x = rng.standard_normal(137)
    grid = LambdaGrid.uniform(20)
    for h in (0, 1, 5):
        path = autocov_path(x, h, grid)
        pointwise = [autocov_seq(x, h, Fraction(k, 20)) for k in range(1, 21)]
        # both read the same prefix sums, so the values are identical
        assert path.values.tolist() == pointwise


def test_autocov_table_columns(rng):
    x = rng.standard_normal(60)
    table = autocov_table(x, 4, centered=True)
    assert table.shape == (20, 5)
    for h in range(5):
        assert table[:, h].tolist() == autocov_path(x, h, centered=True).values.tolist()


def test_crosscov_seq_hand_example():
    got = crosscov_seq([[1.0, 0.0], [0.0, 1.0]], 1)
    assert got.tolist() == [[0.0, 0.5], [0.0, 0.0]]


def test_crosscov_seq_lambda_zero(rng):
    x = rng.standard_normal((10, 3))
    assert not np.any(crosscov_seq(x, 2, 0))


def test_crosscov_negative_lag_is_transpose(rng):
    x = rng.standard_normal((40, 3))
    assert np.array_equal(crosscov_seq(x, -2, 0.7), crosscov_seq(x, 2, 0.7).T)
    assert np.array_equal(crosscov_path(x, -2), np.swapaxes(crosscov_path(x, 2), 1, 2))


def test_crosscov_dimension_one_reduces(rng):
    x = rng.standard_normal(33)
    for h in range(3):
        for lam in (Fraction(1, 3), 0.45, 1):
            assert crosscov_seq(x, h, lam)[0, 0] == autocov_seq(x, h, lam)
    assert crosscov_table(x, 2)[:, :, 0, 0].tolist() == autocov_table(x, 2).tolist()


def test_crosscov_table_shape(rng):
    x = rng.standard_normal((25, 2))
    assert crosscov_table(x, 3, grid=10).shape == (10, 4, 2, 2)


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.eye(2), [1, 0, 1]),
        ([[2.0, 7.0], [7.0, 3.0]], [2, 7, 3]),
        ([[1, 2, 3], [2, 4, 5], [3, 5, 6]], [1, 2, 3, 4, 5, 6]),
    ],
)
def test_vech(m, expected):
    assert vech(m).tolist() == expected


def test_vech_round_trip(rng):
    a = rng.standard_normal((4, 4))
    m = a + a.T
    assert np.array_equal(unvech(vech(m)), m)


def test_vech_not_symmetric():
    with pytest.raises(NotSymmetric):
        vech([[1.0, 2.0], [0.0, 1.0]])


def test_unvech_not_triangular():
    with pytest.raises(ValueError):
        unvech([1.0, 2.0])


def test_uniform_grid():
    grid = LambdaGrid.uniform(20)
    assert len(grid) == 20
    assert grid.is_exact
    assert grid.is_uniform
    assert grid.step == pytest.approx(0.05)
    assert grid.points[-1] == 1.0
    assert grid.weights.tolist() == pytest.approx([0.05] * 20)
    assert repr(grid) == "LambdaGrid.uniform(20)"


def test_uniform_grid_exact_floors():
    grid = LambdaGrid.uniform(20)
    assert grid.truncation_indices(20).tolist() == list(range(1, 21))
    assert grid.truncation_indices(7).tolist() == [(7 * k) // 20 for k in range(1, 21)]


def test_float_grid_decimal_floor():
    grid = LambdaGrid([0.15, 0.3, 1.0])
    assert not grid.is_exact
    assert grid.truncation_indices(20).tolist() == [3, 6, 20]
    assert grid.weights.tolist() == pytest.approx([0.15, 0.15, 0.7])


@pytest.mark.parametrize(
    "points",
    [
        [],
        [0.5, 0.9],
        [0.5, 0.5, 1.0],
        [0.0, 1.0],
        [Fraction(3, 4), Fraction(1, 2), 1],
    ],
)
def test_invalid_grid(points):
    with pytest.raises(InvalidSeries):
        LambdaGrid(points)


def test_grid_coerce():
    assert LambdaGrid.coerce(None) == LambdaGrid.uniform(20)
    assert LambdaGrid.coerce(5) == LambdaGrid.uniform(5)
    grid = LambdaGrid([0.25, 1.0])
    assert LambdaGrid.coerce(grid) is grid


@pytest.mark.parametrize(
    "values",
    [[], [1.0, np.nan], [[1.0, 2.0], [3.0, 4.0]], [1.0, np.inf]],
)
def test_invalid_timeseries(values):
    with pytest.raises(InvalidSeries):
        TimeSeries(values)


def test_timeseries_is_read_only():
    ts = TimeSeries(X)
    with pytest.raises(ValueError):
        ts.values[0] = 0.0


def test_multiseries_channels(rng):
    ms = MultiSeries(rng.standard_normal((12, 3)))
    assert (ms.n, ms.d) == (12, 3)
    assert np.array_equal(ms.channel(1).values, ms.values[:, 1])
    with pytest.raises(InvalidSeries):
        ms.as_univariate()
    assert MultiSeries(X).as_univariate().values.tolist() == list(X)


def test_centered_and_scaled():
    ts = TimeSeries(X)
    assert ts.centered().values.tolist() == [-1.5, -0.5, 0.5, 1.5]
    assert ts.scaled(2.0).values.tolist() == [2.0, 4.0, 6.0, 8.0]


def test_csv_round_trip_univariate(tmp_path, rng):
    ts = TimeSeries(rng.standard_normal(30))
    path = write_series_csv(ts, tmp_path / "x.csv")
    assert path.read_text().splitlines()[0] == "x"
    loaded = read_series_csv(path)
    assert isinstance(loaded, TimeSeries)
    assert np.array_equal(loaded.values, ts.values)


def test_csv_round_trip_multivariate(tmp_path, rng):
    ms = MultiSeries(rng.standard_normal((15, 3)))
    path = write_series_csv(ms, tmp_path / "x.csv")
    assert path.read_text().splitlines()[0] == "x1,x2,x3"
    loaded = read_series_csv(path)
    assert isinstance(loaded, MultiSeries)
    assert np.array_equal(loaded.values, ms.values)


def test_csv_without_header_and_blank_lines(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("1.5\n\n2.5\n-3\n")
    assert read_series_csv(path).values.tolist() == [1.5, 2.5, -3.0]


@pytest.mark.parametrize(
    "content, line_number",
    [
        ("x\n1\nfoo\n", 3),
        ("a,b\n1,2\n3\n", 3),
        ("1\nnan\n", 2),
    ],
)
def test_csv_parse_errors(tmp_path, content, line_number):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(SeriesParseError) as e:
        read_series_csv(path)
    assert e.value.line_number == line_number


def test_csv_empty(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("x\n")
    with pytest.raises(SeriesParseError):
        read_series_csv(path)
