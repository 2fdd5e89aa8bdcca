"""The multivariate final prediction error.

With ``Gamma_h = E(X_t X_{t+h}^T)`` the best linear predictor of ``X_p`` from
``Y = (X_{p-1}, ..., X_0)`` has the total mean squared error

.. code-block:: text

    MM_p = sum_j det(GG_{p-1,j}) / det(GG_{p-1}) = tr(Gamma_0) - tr(C^T GG_{p-1}^{-1} C)

where ``GG_{p-1}`` is the block Toeplitz Gram matrix of ``Y`` (block ``(a, b)`` is
``Gamma_{a-b}``), ``C`` stacks ``Gamma_1, ..., Gamma_p`` and ``GG_{p-1,j}`` is the Gram matrix of
``(X_p^{(j)}, Y)``. The Cholesky form is the production path, the determinant sum the oracle.
"""

import logging
from typing import Optional

import numpy as np
from cached_property import cached_property
from scipy.linalg import cho_factor
from scipy.linalg import cho_solve

from pivotfpe.config import SINGULAR_RTOL
from pivotfpe.config import SYMMETRY_TOL
from pivotfpe.exceptions import InvalidSeries
from pivotfpe.exceptions import NotSymmetric
from pivotfpe.exceptions import PathSingular
from pivotfpe.exceptions import SingularToeplitz
from pivotfpe.log import create_logger
from pivotfpe.log import logged
from pivotfpe.series import as_multiseries
from pivotfpe.series import crosscov_seq
from pivotfpe.series import crosscov_table
from pivotfpe.series import LambdaGrid
from pivotfpe.series import SequentialPath
from pivotfpe.types import GridInput


class BlockAutocov:
    """Autocovariance matrices ``Gamma_0, ..., Gamma_p`` of a ``d``-variate process.

    Args:
        gammas: ``(p + 1, d, d)`` array; ``Gamma_0`` must be symmetric positive semi-definite.
    """

    def __init__(self, gammas, tol: float = SYMMETRY_TOL):
        array = np.array(gammas, dtype=float)
        if array.ndim == 1:
            array = array[:, None, None]
        if array.ndim != 3 or array.shape[1] != array.shape[2] or array.shape[0] == 0:
            raise ValueError(f"expected a (p + 1, d, d) array, got shape {array.shape}")
        gamma0 = array[0]
        scale = max(1.0, float(np.max(np.abs(gamma0))))
        if np.max(np.abs(gamma0 - gamma0.T)) > tol * scale:
            raise NotSymmetric("Gamma_0 is not symmetric")
        if np.min(np.linalg.eigvalsh(gamma0)) < -tol * scale:
            raise SingularToeplitz(0, "Gamma_0 is not positive semi-definite")
        array.setflags(write=False)
        self.gammas = array

    @property
    def p(self) -> int:
        return self.gammas.shape[0] - 1

    @property
    def d(self) -> int:
        return self.gammas.shape[1]

    def lag(self, h: int) -> np.ndarray:
        """``Gamma_h``, with ``Gamma_{-h} = Gamma_h^T``."""
        return self.gammas[h] if h >= 0 else self.gammas[-h].T

    def truncated(self, p: int) -> "BlockAutocov":
        return BlockAutocov(self.gammas[: p + 1])

    def gram(self, p: int = None) -> np.ndarray:
        """The ``(p d) x (p d)`` Gram matrix of ``(X_{p-1}, ..., X_0)``."""
        p = self.p if p is None else p
        d = self.d
        out = np.empty((p * d, p * d))
        for a in range(p):
            for b in range(p):
                out[a * d : (a + 1) * d, b * d : (b + 1) * d] = self.lag(a - b)
        return out

    def cross(self, p: int = None) -> np.ndarray:
        """``C``: ``Gamma_1, ..., Gamma_p`` stacked into a ``(p d) x d`` matrix."""
        p = self.p if p is None else p
        return self.gammas[1 : p + 1].reshape(p * self.d, self.d)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(p={self.p}, d={self.d})"


def mv_m_schur(b: BlockAutocov, p: int = None, rtol: float = SINGULAR_RTOL) -> float:
    """``tr(Gamma_0) - tr(C^T GG_{p-1}^{-1} C)`` through a Cholesky factorization."""
    p = b.p if p is None else p
    trace0 = float(np.trace(b.gammas[0]))
    if p == 0:
        return trace0
    gram = b.gram(p)
    try:
        factor, lower = cho_factor(gram, lower=True)
    except np.linalg.LinAlgError:
        raise SingularToeplitz(p - 1)
    pivots = np.diag(factor) ** 2
    if np.min(pivots) <= rtol * max(float(np.max(np.diag(gram))), 0.0):
        raise SingularToeplitz(p - 1)
    c = b.cross(p)
    return trace0 - float(np.sum(c * cho_solve((factor, lower), c)))


def mv_m_det_ratio(b: BlockAutocov, p: int = None) -> float:
    """``sum_j det(GG_{p-1,j}) / det(GG_{p-1})`` by explicit log-determinants."""
    p = b.p if p is None else p
    gamma0 = b.gammas[0]
    if p == 0:
        return float(np.trace(gamma0))
    gram = b.gram(p)
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularToeplitz(p - 1)
    c = b.cross(p)
    total = 0.0
    for j in range(b.d):
        column = c[:, j : j + 1]
        bordered = np.block([[gamma0[j : j + 1, j : j + 1], column.T], [column, gram]])
        sign_j, logdet_j = np.linalg.slogdet(bordered)
        total += sign_j * np.exp(logdet_j - logdet)
    return float(total)


class MultivariateStats:
    """Population ``MM_0..MM_p``.

    ``s`` holds ``SS_k = MM_k / MM_0`` and ``q`` holds ``QQ_k = MM_k / MM_{k-1}``.
    """

    def __init__(self, m: np.ndarray):
        self.m = m

    @property
    def p(self) -> int:
        return len(self.m) - 1

    @cached_property
    def s(self) -> np.ndarray:
        return self.m / self.m[0]

    @cached_property
    def q(self) -> np.ndarray:
        return self.m[1:] / self.m[:-1]

    def __repr__(self) -> str:
        return f"{type(self).__name__}(m={self.m.tolist()!r})"


def mv_population_stats(b: BlockAutocov, rtol: float = SINGULAR_RTOL) -> MultivariateStats:
    return MultivariateStats(np.array([mv_m_schur(b, k, rtol=rtol) for k in range(b.p + 1)]))


class MultiSequentialEstimator:
    """Sequential multivariate prediction-error paths of one sample.

    Args:
        x: The sample, anything :py:func:`pivotfpe.series.as_multiseries` accepts.
        grid: The lambda grid, the default 20-point uniform grid if not given.
        centered: Use mean-centered cross-covariances.
        rtol: Singularity tolerance of the Cholesky pivots.
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
        self.series = as_multiseries(x)
        self.grid = LambdaGrid.coerce(grid)
        self.centered = centered
        self.rtol = rtol
        self.logger = create_logger(type(self).__name__, logger)
        self._crosscov: Optional[np.ndarray] = None
        self._m = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.series!r}, {self.grid!r}, centered={self.centered!r})"

    def _check_order(self, p: int) -> None:
        if p < 0:
            raise ValueError(f"order must be non-negative, got {p}")
        if p >= self.series.n:
            raise InvalidSeries(
                f"order p={p} needs more than p observations, got N={self.series.n}"
            )

    def crosscov(self, max_lag: int) -> np.ndarray:
        """Sequential cross-covariances ``(G, max_lag + 1, d, d)``."""
        self._check_order(max_lag)
        if self._crosscov is None or self._crosscov.shape[1] <= max_lag:
            self.logger.debug("computing sequential cross-covariances up to lag %d", max_lag)
            self._crosscov = crosscov_table(self.series, max_lag, self.grid, self.centered)
        return self._crosscov[:, : max_lag + 1]

    @logged(log_args=True)
    def m_values(self, p: int) -> np.ndarray:
        """``MM_p(lambda)`` on every grid point."""
        if p not in self._m:
            table = self.crosscov(p)
            values = np.empty(len(self.grid))
            for index, lam in enumerate(self.grid.points):
                if p > 0 and np.trace(table[index, 0]) <= 0:
                    raise PathSingular(float(lam), 0)
                try:
                    values[index] = mv_m_schur(BlockAutocov(table[index]), p, rtol=self.rtol)
                except SingularToeplitz as e:
                    raise PathSingular(float(lam), e.order)
            self._m[p] = values
        return self._m[p]

    def m_path(self, p: int) -> SequentialPath:
        return SequentialPath(self.grid, self.m_values(p), 0.0)

    def s_path(self, p: int) -> SequentialPath:
        if p == 0:
            self._check_order(0)
            return SequentialPath(self.grid, np.ones(len(self.grid)), 1.0)
        return SequentialPath(self.grid, self.m_values(p) / self.m_values(0), 1.0)

    def q_path(self, p: int) -> SequentialPath:
        if p < 1:
            raise ValueError("the relative improvement is defined for orders p >= 1")
        return SequentialPath(self.grid, self.m_values(p) / self.m_values(p - 1), 1.0)


def mv_m_hat(x, p: int, lam=1, centered: bool = False, rtol: float = SINGULAR_RTOL) -> float:
    """``MM_p(lambda)`` at a single fraction."""
    ms = as_multiseries(x)
    if p >= ms.n:
        raise InvalidSeries(f"order p={p} needs more than p observations, got N={ms.n}")
    gammas = np.stack([crosscov_seq(ms, h, lam, centered) for h in range(p + 1)])
    if p > 0 and np.trace(gammas[0]) <= 0:
        raise PathSingular(lam, 0)
    try:
        return mv_m_schur(BlockAutocov(gammas), p, rtol=rtol)
    except SingularToeplitz as e:
        raise PathSingular(lam, e.order)


def mv_m_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return MultiSequentialEstimator(x, grid, centered).m_path(p)


def mv_s_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return MultiSequentialEstimator(x, grid, centered).s_path(p)


def mv_q_path(x, p: int, grid: GridInput = None, centered: bool = False) -> SequentialPath:
    return MultiSequentialEstimator(x, grid, centered).q_path(p)
