"""Sequential sample paths of the univariate prediction measures.

A :py:class:`SequentialEstimator` computes the sequential autocovariances of a sample once and
feeds them, one grid point per row, through the batched Durbin-Levinson recursion. All four
paths of an order ``p`` then come out of the same pass:

* ``M_p(lambda)``, with ``M_p(0) = 0``;
* ``S_p(lambda) = M_p(lambda) / M_0(lambda)``, with ``S_p(0) = 1``;
* ``Q_p(lambda) = M_p(lambda) / M_{p-1}(lambda)``, with ``Q_p(0) = 1``;
* ``kappa_p(lambda)``, the last reflection coefficient, with ``kappa_p(0) = 0``.
"""

import logging
from typing import Optional
from typing import Tuple

import numpy as np

from pivotfpe.config import SINGULAR_RTOL
from pivotfpe.exceptions import InvalidSeries
from pivotfpe.exceptions import PathSingular
from pivotfpe.log import create_logger
from pivotfpe.log import logged
from pivotfpe.prediction.base import AutocovVector
from pivotfpe.prediction.base import durbin_levinson_batch
from pivotfpe.series import as_timeseries
from pivotfpe.series import autocov_table
from pivotfpe.series import LambdaGrid
from pivotfpe.series import SequentialPath
from pivotfpe.types import GridInput


class SequentialEstimator:
    """Sequential prediction-error paths of one univariate sample.

    Args:
        x: The sample, anything :py:func:`pivotfpe.series.as_timeseries` accepts.
        grid: The lambda grid, the default 20-point uniform grid if not given.
        centered: Use mean-centered autocovariances.
        rtol: Singularity tolerance of the recursion.
        logger: Parent logger.
    """

    def __init__(
        self,
        x,
        grid: GridInput = None,
        centered: bool = False,
        rtol: float = SINGULAR_RTOL,
        logger: Optional[logging.Logger] = None,
    ):
        self.series = as_timeseries(x)
        self.grid = LambdaGrid.coerce(grid)
        self.centered = centered
        self.rtol = rtol
        self.logger = create_logger(type(self).__name__, logger)
        self._autocov: Optional[np.ndarray] = None
        self._fit: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.series!r}, {self.grid!r}, centered={self.centered!r})"

    def _check_order(self, p: int) -> None:
        if p < 0:
            raise ValueError(f"order must be non-negative, got {p}")
        if p >= self.series.n:
            raise InvalidSeries(
                f"order p={p} needs more than p observations, got N={self.series.n}"
            )

    def autocov(self, max_lag: int) -> np.ndarray:
        """Sequential autocovariances ``(G, max_lag + 1)``, computed once for the largest lag."""
        self._check_order(max_lag)
        if self._autocov is None or self._autocov.shape[1] <= max_lag:
            self.logger.debug("computing sequential autocovariances up to lag %d", max_lag)
            self._autocov = autocov_table(self.series, max_lag, self.grid, self.centered)
        return self._autocov[:, : max_lag + 1]

    def autocov_vector(self, p: int, index: int = -1) -> AutocovVector:
        """The autocovariance vector at one grid point, the full sample by default."""
        return AutocovVector(self.autocov(p)[index])

    @logged(log_args=True)
    def fit(self, p_max: int) -> Tuple[np.ndarray, np.ndarray]:
        """``M_0..M_{p_max}`` and ``kappa_1..kappa_{p_max}`` on every grid point.

        Returns:
            Arrays of shapes ``(G, p_max + 1)`` and ``(G, p_max)``.

        Raises:
            :py:class:`pivotfpe.exceptions.PathSingular` at the first grid point where the
            sequential Toeplitz matrix of an order below ``p_max`` is numerically singular.
        """
        self._check_order(p_max)
        if self._fit is None or self._fit[0].shape[1] <= p_max:
            self._fit = durbin_levinson_batch(self.autocov(p_max), rtol=self.rtol)
        m, kappa, first_singular = self._fit
        failing = np.flatnonzero((first_singular >= 0) & (first_singular < p_max))
        if failing.size:
            index = int(failing[0])
            raise PathSingular(float(self.grid.points[index]), int(first_singular[index]))
        return m[:, : p_max + 1], kappa[:, :p_max]

    def m_path(self, p: int) -> SequentialPath:
        m, _ = self.fit(p)
        return SequentialPath(self.grid, m[:, p], 0.0)

    def s_path(self, p: int) -> SequentialPath:
        if p == 0:
            self._check_order(0)
            return SequentialPath(self.grid, np.ones(len(self.grid)), 1.0)
        m, _ = self.fit(p)
        return SequentialPath(self.grid, m[:, p] / m[:, 0], 1.0)

    def q_path(self, p: int) -> SequentialPath:
        if p < 1:
            raise ValueError("the relative improvement is defined for orders p >= 1")
        m, _ = self.fit(p)
        return SequentialPath(self.grid, m[:, p] / m[:, p - 1], 1.0)

    def kappa_path(self, p: int) -> SequentialPath:
        if p < 1:
            raise ValueError("the partial autocorrelation is defined for orders p >= 1")
        _, kappa = self.fit(p)
        return SequentialPath(self.grid, kappa[:, p - 1], 0.0)


def m_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return SequentialEstimator(x, grid, centered).m_path(p)


def s_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return SequentialEstimator(x, grid, centered).s_path(p)


def q_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return SequentialEstimator(x, grid, centered).q_path(p)


def kappa_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return SequentialEstimator(x, grid, centered).kappa_path(p)
