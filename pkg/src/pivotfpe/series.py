"""Observed samples, lambda grids and the sequential autocovariance estimators.

Every sequential estimator here divides by the full sample length ``N`` and truncates the sum at
``floor(lambda * (N - |h|))``:

.. code-block:: text

    gamma_h(lambda) = 1/N * sum_{i=1}^{floor(lambda (N - |h|))} X_i X_{i+|h|}

so that ``lambda = 1`` gives the usual full-sample estimator and ``lambda = 0`` gives ``0``.
"""

import csv
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import Union

import numpy as np
from cached_property import cached_property

from .config import DEFAULT_GRID_POINTS
from .config import SYMMETRY_TOL
from .exceptions import InvalidSeries
from .exceptions import LagOutOfRange
from .exceptions import NotSymmetric
from .exceptions import SeriesParseError
from .types import GridInput
from .types import RealSequence
from .utils import floor_fraction
from .utils import format_real


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class TimeSeries:
    """A univariate sample ``X_1, ..., X_N``.

    Args:
        values: Finite real observations, at least one.
    """

    def __init__(self, values: RealSequence):
        array = np.array(values, dtype=float)
        if array.ndim != 1:
            raise InvalidSeries(f"TimeSeries expects a 1-d sequence, got shape {array.shape}")
        if array.size == 0:
            raise InvalidSeries("TimeSeries needs at least one observation")
        if not np.all(np.isfinite(array)):
            bad = int(np.flatnonzero(~np.isfinite(array))[0])
            raise InvalidSeries(f"non-finite value at index {bad}")
        self._values = _readonly(array)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return len(self._values)

    def __len__(self) -> int:
        return self.n

    @cached_property
    def mean(self) -> float:
        return float(np.mean(self._values))

    @cached_property
    def centered_values(self) -> np.ndarray:
        return _readonly(self._values - self.mean)

    def centered(self) -> "TimeSeries":
        return TimeSeries(self.centered_values)

    def scaled(self, c: float) -> "TimeSeries":
        return TimeSeries(c * self._values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class MultiSeries:
    """A ``d``-variate sample, stored as an ``(N, d)`` array.

    A 1-d input is read as a single channel.
    """

    def __init__(self, values: RealSequence):
        array = np.array(values, dtype=float)
        if array.ndim == 1:
            array = array[:, None]
        if array.ndim != 2:
            raise InvalidSeries(f"MultiSeries expects an (N, d) array, got shape {array.shape}")
        if array.shape[0] == 0 or array.shape[1] == 0:
            raise InvalidSeries(f"MultiSeries needs N >= 1 and d >= 1, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            row, col = (int(i) for i in np.argwhere(~np.isfinite(array))[0])
            raise InvalidSeries(f"non-finite value at row {row}, channel {col}")
        self._values = _readonly(array)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.shape[0]

    @property
    def d(self) -> int:
        return self._values.shape[1]

    def __len__(self) -> int:
        return self.n

    @cached_property
    def mean(self) -> np.ndarray:
        return _readonly(np.mean(self._values, axis=0))

    @cached_property
    def centered_values(self) -> np.ndarray:
        return _readonly(self._values - self.mean)

    def centered(self) -> "MultiSeries":
        return MultiSeries(self.centered_values)

    def scaled(self, c: float) -> "MultiSeries":
        return MultiSeries(c * self._values)

    def channel(self, j: int) -> TimeSeries:
        return TimeSeries(self._values[:, j])

    def as_univariate(self) -> TimeSeries:
        if self.d != 1:
            raise InvalidSeries(f"cannot view a {self.d}-channel series as univariate")
        return self.channel(0)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, d={self.d})"


def as_timeseries(x) -> TimeSeries:
    """Coerces arrays and single-channel :py:class:`MultiSeries` to :py:class:`TimeSeries`."""
    if isinstance(x, TimeSeries):
        return x
    if isinstance(x, MultiSeries):
        return x.as_univariate()
    return TimeSeries(x)


def as_multiseries(x) -> MultiSeries:
    if isinstance(x, MultiSeries):
        return x
    if isinstance(x, TimeSeries):
        return MultiSeries(x.values)
    return MultiSeries(x)


class LambdaGrid:
    """A strictly increasing set of fractions ``0 < lambda_1 < ... < lambda_G = 1``.

    Grids made of :py:class:`fractions.Fraction` points (like :py:meth:`uniform`) keep exact
    numerators over a common denominator, so their truncation indices are computed in integer
    arithmetic. Float points are floored through their shortest decimal representation.
    """

    def __init__(self, points: Sequence[Union[float, Fraction]]):
        points = list(points)
        if not points:
            raise InvalidSeries("a lambda grid needs at least one point")
        exact = all(isinstance(p, (Fraction, int)) for p in points)
        if exact:
            fractions = [Fraction(p) for p in points]
            self._denominator: Optional[int] = math.lcm(*(f.denominator for f in fractions))
            self._numerators: Optional[np.ndarray] = np.array(
                [f.numerator * (self._denominator // f.denominator) for f in fractions],
                dtype=np.int64,
            )
            array = self._numerators / self._denominator
            last_is_one = fractions[-1] == 1
        else:
            self._denominator = None
            self._numerators = None
            array = np.array(points, dtype=float)
            last_is_one = array[-1] == 1.0
        if not last_is_one:
            raise InvalidSeries(f"the last grid point must be exactly 1, got {points[-1]!r}")
        if array[0] <= 0 or np.any(np.diff(array) <= 0):
            raise InvalidSeries("grid points must be strictly increasing within (0, 1]")
        self._points = _readonly(np.asarray(array, dtype=float))

    @classmethod
    def uniform(cls, points: int = DEFAULT_GRID_POINTS) -> "LambdaGrid":
        """The grid ``k / points`` for ``k = 1..points``."""
        if points < 1:
            raise InvalidSeries(f"a uniform grid needs at least one point, got {points}")
        return cls([Fraction(k, points) for k in range(1, points + 1)])

    @classmethod
    def coerce(cls, grid: GridInput) -> "LambdaGrid":
        """``None`` means the default grid, an integer a uniform grid of that size."""
        if grid is None:
            return cls.uniform()
        if isinstance(grid, LambdaGrid):
            return grid
        if isinstance(grid, int):
            return cls.uniform(grid)
        return cls(grid)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def is_exact(self) -> bool:
        return self._denominator is not None

    @property
    def is_uniform(self) -> bool:
        return self.is_exact and np.array_equal(
            self._numerators * len(self), np.arange(1, len(self) + 1) * self._denominator
        )

    @property
    def step(self) -> Optional[float]:
        """``1/G`` for uniform grids, ``None`` otherwise."""
        return 1.0 / len(self) if self.is_uniform else None

    @cached_property
    def weights(self) -> np.ndarray:
        """Right-endpoint Riemann weights ``lambda_i - lambda_{i-1}`` with ``lambda_0 = 0``."""
        if self.is_exact:
            widths = np.diff(self._numerators, prepend=0) / self._denominator
        else:
            widths = np.diff(self._points, prepend=0.0)
        return _readonly(np.asarray(widths, dtype=float))

    def truncation_indices(self, m: int) -> np.ndarray:
        """``floor(lambda_i * m)`` for every grid point."""
        if self.is_exact:
            return (self._numerators * int(m)) // self._denominator
        return np.array([floor_fraction(float(p), int(m)) for p in self._points], dtype=np.int64)

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[float]:
        return iter(self._points.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LambdaGrid):
            return NotImplemented
        return np.array_equal(self._points, other._points)

    def __hash__(self) -> int:
        return hash(self._points.tobytes())

    def __repr__(self) -> str:
        if self.is_uniform:
            return f"{type(self).__name__}.uniform({len(self)})"
        return f"{type(self).__name__}({self._points.tolist()!r})"


class SequentialPath:
    """Values of a sequential statistic on a :py:class:`LambdaGrid`.

    ``value_at_zero`` is the convention for ``lambda = 0``; it is stored but never integrated.
    """

    def __init__(self, grid: LambdaGrid, values: RealSequence, value_at_zero: float = 0.0):
        array = np.array(values, dtype=float)
        if array.shape != (len(grid),):
            raise InvalidSeries(
                f"path has {array.shape} values but the grid has {len(grid)} points"
            )
        self.grid = grid
        self.values = _readonly(array)
        self.value_at_zero = float(value_at_zero)

    @property
    def at_one(self) -> float:
        """The full-sample value, ``lambda = 1``."""
        return float(self.values[-1])

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.grid!r}, at_one={self.at_one!r})"


def _checked_lag(h: int, n: int) -> int:
    lag = abs(int(h))
    if lag >= n:
        raise LagOutOfRange(f"lag {h} is out of range for a series of length {n}")
    return lag


def _checked_lambda(lam) -> None:
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")


def _lagged_prefix_sums(v: np.ndarray, lag: int) -> np.ndarray:
    """``S[k] = sum_{i<k} v[i] v[i+lag]``, with ``S[0] = 0``; works row-wise on ``(N, d)`` too."""
    n = v.shape[0]
    if v.ndim == 1:
        products = v[: n - lag] * v[lag:]
    else:
        products = v[: n - lag, :, None] * v[lag:, None, :]
    prefix = np.zeros((n - lag + 1,) + products.shape[1:])
    np.cumsum(products, axis=0, out=prefix[1:])
    return prefix


def autocov_seq(x, h: int, lam=1, centered: bool = False) -> float:
    """The sequential autocovariance ``gamma_h(lambda)``.

    Args:
        x: The sample.
        h: Lag; the estimator depends on ``|h|`` only.
        lam: Fraction in ``[0, 1]``, a float or a :py:class:`fractions.Fraction`.
        centered: Subtract the full-sample mean first.
    """
    ts = as_timeseries(x)
    lag = _checked_lag(h, ts.n)
    _checked_lambda(lam)
    v = ts.centered_values if centered else ts.values
    k = floor_fraction(lam, ts.n - lag)
    return float(_lagged_prefix_sums(v, lag)[k] / ts.n)


def autocov_centered(x, h: int, lam=1) -> float:
    """The centered autocovariance, sequential in ``lam`` with the full-sample mean."""
    return autocov_seq(x, h, lam, centered=True)


def autocov_path(x, h: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    ts = as_timeseries(x)
    grid = LambdaGrid.coerce(grid)
    lag = _checked_lag(h, ts.n)
    v = ts.centered_values if centered else ts.values
    prefix = _lagged_prefix_sums(v, lag)
    return SequentialPath(grid, prefix[grid.truncation_indices(ts.n - lag)] / ts.n, 0.0)


def autocov_table(x, max_lag: int, grid: GridInput = None, centered: bool = False) -> np.ndarray:
    """All sequential autocovariances up to ``max_lag``, shaped ``(G, max_lag + 1)``."""
    ts = as_timeseries(x)
    grid = LambdaGrid.coerce(grid)
    _checked_lag(max_lag, ts.n)
    v = ts.centered_values if centered else ts.values
    table = np.empty((len(grid), max_lag + 1))
    for lag in range(max_lag + 1):
        prefix = _lagged_prefix_sums(v, lag)
        table[:, lag] = prefix[grid.truncation_indices(ts.n - lag)] / ts.n
    return table


def crosscov_seq(x, h: int, lam=1, centered: bool = False) -> np.ndarray:
    """The sequential cross-covariance matrix ``1/N sum X_i X_{i+h}^T``.

    Negative lags return the transpose of the positive lag.
    """
    ms = as_multiseries(x)
    lag = _checked_lag(h, ms.n)
    _checked_lambda(lam)
    if h < 0:
        return crosscov_seq(ms, lag, lam, centered).T
    v = ms.centered_values if centered else ms.values
    k = floor_fraction(lam, ms.n - lag)
    return _lagged_prefix_sums(v, lag)[k] / ms.n


def crosscov_path(x, h: int, grid: GridInput = None, centered: bool = False) -> np.ndarray:
    """``crosscov_seq`` on every grid point, shaped ``(G, d, d)``."""
    ms = as_multiseries(x)
    grid = LambdaGrid.coerce(grid)
    lag = _checked_lag(h, ms.n)
    v = ms.centered_values if centered else ms.values
    values = _lagged_prefix_sums(v, lag)[grid.truncation_indices(ms.n - lag)] / ms.n
    if h < 0:
        return np.swapaxes(values, 1, 2)
    return values


def crosscov_table(x, max_lag: int, grid: GridInput = None, centered: bool = False) -> np.ndarray:
    """All sequential cross-covariances up to ``max_lag``, shaped ``(G, max_lag + 1, d, d)``."""
    ms = as_multiseries(x)
    grid = LambdaGrid.coerce(grid)
    _checked_lag(max_lag, ms.n)
    v = ms.centered_values if centered else ms.values
    table = np.empty((len(grid), max_lag + 1, ms.d, ms.d))
    for lag in range(max_lag + 1):
        prefix = _lagged_prefix_sums(v, lag)
        table[:, lag] = prefix[grid.truncation_indices(ms.n - lag)] / ms.n
    return table


def vech(m, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Stacks the columns of the lower triangle (diagonal included) of a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"vech needs a square matrix, got shape {m.shape}")
    asymmetry = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asymmetry > tol * max(1.0, float(np.max(np.abs(m)))):
        raise NotSymmetric(f"matrix is not symmetric (max asymmetry {asymmetry:.3g})")
    return m.T[np.triu_indices(m.shape[0])]


def unvech(v) -> np.ndarray:
    """Inverse of :py:func:`vech`."""
    v = np.asarray(v, dtype=float)
    d = (math.isqrt(8 * v.size + 1) - 1) // 2
    if d * (d + 1) // 2 != v.size:
        raise ValueError(f"{v.size} is not a triangular number")
    rows, cols = np.triu_indices(d)
    out = np.empty((d, d))
    out[cols, rows] = v
    out[rows, cols] = v
    return out


def _parse_row(row: List[str]) -> Optional[List[float]]:
    try:
        return [float(cell) for cell in row]
    except ValueError:
        return None


def read_series_csv(path) -> Union[TimeSeries, MultiSeries]:
    """Reads one column as a :py:class:`TimeSeries`, ``d`` columns as a :py:class:`MultiSeries`.

    A first row that does not parse is taken as the header. Blank lines are skipped.
    """
    rows: List[List[float]] = []
    width = None
    with Path(path).open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        for row in reader:
            cells = [cell.strip() for cell in row]
            if not any(cells):
                continue
            parsed = _parse_row(cells)
            if parsed is None:
                if not rows and width is None:
                    width = len(cells)
                    continue
                raise SeriesParseError(f"non-numeric entry in {row!r}", reader.line_num)
            if not all(math.isfinite(value) for value in parsed):
                raise SeriesParseError(f"non-finite entry in {row!r}", reader.line_num)
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise SeriesParseError(
                    f"expected {width} columns, got {len(parsed)}", reader.line_num
                )
            rows.append(parsed)
    if not rows:
        raise SeriesParseError(f"{path}: no observations found")
    if width == 1:
        return TimeSeries([row[0] for row in rows])
    return MultiSeries(rows)


def write_series_csv(series, path) -> Path:
    """Writes the format :py:func:`read_series_csv` reads, with a header row."""
    path = Path(path)
    values = series.values if series.values.ndim == 2 else series.values[:, None]
    header = ["x"] if values.shape[1] == 1 else [f"x{j + 1}" for j in range(values.shape[1])]
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in values:
            writer.writerow([format_real(value) for value in row])
    return path
