"""Final prediction errors and partial autocorrelations from autocovariances.

The production path is the Durbin-Levinson recursion. For an autocovariance vector
``(gamma_0, ..., gamma_p)`` it yields the prediction errors ``M_0..M_p``, the partial
autocorrelations ``kappa_1..kappa_p`` and the AR coefficient vector of every order, where

.. code-block:: text

    M_p = det(G_p) / det(G_{p-1}),    G_p = (gamma_{j-i})_{i,j=0..p},    det(G_{-1}) = 1
    M_k = M_{k-1} * (1 - kappa_k ** 2)

The explicit determinant ratio and the explicit Yule-Walker solve for ``kappa_p`` are kept as
independent oracles (:py:func:`mp_det_ratio`, :py:func:`kappa_explicit`).
"""

from typing import List
from typing import Tuple
from typing import Union

import numpy as np
from cached_property import cached_property
from scipy.linalg import toeplitz

from pivotfpe.config import SINGULAR_RTOL
from pivotfpe.exceptions import SingularToeplitz
from pivotfpe.types import RealSequence


class AutocovVector:
    """Autocovariances ``(gamma_0, gamma_1, ..., gamma_p)`` of a stationary process.

    Args:
        gamma: The autocovariances, ``gamma_0 > 0``.
    """

    def __init__(self, gamma: RealSequence):
        array = np.array(gamma, dtype=float)
        if array.ndim != 1 or array.size == 0:
            raise ValueError(f"expected a non-empty 1-d autocovariance vector, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("autocovariances must be finite")
        if array[0] <= 0:
            raise SingularToeplitz(0, f"gamma_0 must be positive, got {array[0]!r}")
        array.setflags(write=False)
        self.gamma = array

    @property
    def p(self) -> int:
        return len(self.gamma) - 1

    def truncated(self, p: int) -> "AutocovVector":
        if not 0 <= p <= self.p:
            raise ValueError(f"order {p} is out of range 0..{self.p}")
        return AutocovVector(self.gamma[: p + 1])

    def toeplitz(self, k: int = None) -> np.ndarray:
        """The ``(k+1) x (k+1)`` Toeplitz matrix ``G_k``, ``G_p`` by default."""
        k = self.p if k is None else k
        return toeplitz(self.gamma[: k + 1])

    def __len__(self) -> int:
        return len(self.gamma)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.gamma.tolist()!r})"


class DurbinLevinsonResult:
    """Everything the recursion produces up to order ``p``.

    Attributes:
        m: Prediction errors ``M_0..M_p``.
        kappa: Partial autocorrelations ``kappa_1..kappa_p``.
        phi: ``phi[k]`` is the order-``k`` coefficient vector (``phi[0]`` is empty).
    """

    def __init__(self, m: np.ndarray, kappa: np.ndarray, phi: List[np.ndarray]):
        self.m = m
        self.kappa = kappa
        self.phi = phi

    @property
    def p(self) -> int:
        return len(self.m) - 1

    @cached_property
    def s(self) -> np.ndarray:
        """Relative prediction errors ``S_k = M_k / M_0``."""
        return self.m / self.m[0]

    @cached_property
    def q(self) -> np.ndarray:
        """Relative improvements ``Q_k = M_k / M_{k-1}`` for ``k = 1..p``."""
        return self.m[1:] / self.m[:-1]

    @cached_property
    def r2(self) -> np.ndarray:
        return 1.0 - self.s

    def __repr__(self) -> str:
        return f"{type(self).__name__}(m={self.m.tolist()!r}, kappa={self.kappa.tolist()!r})"


def durbin_levinson_batch(
    gammas, rtol: float = SINGULAR_RTOL
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Runs the recursion on many autocovariance vectors at once.

    Args:
        gammas: ``(B, p + 1)`` array, one autocovariance vector per row.
        rtol: An intermediate ``M_k <= rtol * gamma_0`` (``k < p``) stops the row.

    Returns:
        ``(m, kappa, first_singular)`` of shapes ``(B, p + 1)``, ``(B, p)`` and ``(B,)``.
        ``first_singular`` holds the first singular order per row and ``-1`` where the row is
        regular. Orders above a singular one carry ``kappa = 0`` and must not be used.
    """
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    rows, width = gammas.shape
    p = width - 1
    m = np.empty((rows, width))
    kappa = np.zeros((rows, p))
    phi = np.zeros((rows, p))
    first_singular = np.full(rows, -1, dtype=np.int64)
    gamma0 = gammas[:, 0]
    m[:, 0] = gamma0
    for k in range(1, p + 1):
        previous = m[:, k - 1]
        singular = ((previous <= rtol * gamma0) | (gamma0 <= 0)) & (first_singular < 0)
        first_singular[singular] = k - 1
        regular = first_singular < 0
        lagged = gammas[:, k - 1 : 0 : -1]
        numerator = gammas[:, k] - np.einsum("bj,bj->b", phi[:, : k - 1], lagged)
        kk = np.where(regular, numerator / np.where(regular, previous, 1.0), 0.0)
        if k > 1:
            phi[:, : k - 1] = phi[:, : k - 1] - kk[:, None] * phi[:, k - 2 :: -1]
        phi[:, k - 1] = kk
        kappa[:, k - 1] = kk
        m[:, k] = previous * (1.0 - kk**2)
    return m, kappa, first_singular


def step_up(kappa: RealSequence) -> List[np.ndarray]:
    """Coefficient vectors of every order from the reflection coefficients."""
    phi = [np.zeros(0)]
    for kk in np.asarray(kappa, dtype=float):
        previous = phi[-1]
        phi.append(np.append(previous - kk * previous[::-1], kk))
    return phi


def durbin_levinson(g: Union[AutocovVector, RealSequence], rtol: float = SINGULAR_RTOL):
    """The Durbin-Levinson recursion up to the order of ``g``.

    Raises:
        :py:class:`pivotfpe.exceptions.SingularToeplitz` when an intermediate ``M_k`` falls below
        ``rtol * gamma_0``.
    """
    if not isinstance(g, AutocovVector):
        g = AutocovVector(g)
    m, kappa, first_singular = durbin_levinson_batch(g.gamma[None, :], rtol=rtol)
    if first_singular[0] >= 0:
        raise SingularToeplitz(int(first_singular[0]))
    return DurbinLevinsonResult(m[0], kappa[0], step_up(kappa[0]))


def autocov_from_kappa(gamma0: float, kappa: RealSequence) -> AutocovVector:
    """Inverse of the recursion: the autocovariances with variance ``gamma0`` and the given
    partial autocorrelations. Any ``|kappa_k| < 1`` gives a positive definite Toeplitz matrix.
    """
    kappa = np.asarray(kappa, dtype=float)
    gamma = [float(gamma0)]
    m = float(gamma0)
    phi = step_up(kappa)
    for k, kk in enumerate(kappa, start=1):
        previous = phi[k - 1]
        gamma.append(kk * m + float(np.dot(previous, gamma[k - 1 : 0 : -1])))
        m *= 1.0 - kk**2
    return AutocovVector(gamma)


def mp_det_ratio(g: Union[AutocovVector, RealSequence], p: int = None) -> float:
    """``det(G_p) / det(G_{p-1})`` by explicit log-determinants."""
    if not isinstance(g, AutocovVector):
        g = AutocovVector(g)
    p = g.p if p is None else p
    if p == 0:
        return float(g.gamma[0])
    sign_low, logdet_low = np.linalg.slogdet(g.toeplitz(p - 1))
    if sign_low <= 0 or not np.isfinite(logdet_low):
        raise SingularToeplitz(p - 1)
    sign_high, logdet_high = np.linalg.slogdet(g.toeplitz(p))
    return float(sign_high * np.exp(logdet_high - logdet_low))


def kappa_explicit(g: Union[AutocovVector, RealSequence], p: int = None) -> float:
    """``e_p^T G_{p-1}^{-1} (gamma_1, ..., gamma_p)^T`` by a direct solve."""
    if not isinstance(g, AutocovVector):
        g = AutocovVector(g)
    p = g.p if p is None else p
    if p < 1:
        raise ValueError("kappa is defined for orders p >= 1")
    try:
        xi = np.linalg.solve(g.toeplitz(p - 1), g.gamma[1 : p + 1])
    except np.linalg.LinAlgError:
        raise SingularToeplitz(p - 1)
    return float(xi[-1])


def population_stats(g, rtol: float = SINGULAR_RTOL):
    """Population measures from true autocovariances.

    Returns a :py:class:`DurbinLevinsonResult` for an :py:class:`AutocovVector` and a
    :py:class:`pivotfpe.prediction.multivariate.MultivariateStats` for a block autocovariance.
    """
    from pivotfpe.prediction.multivariate import BlockAutocov
    from pivotfpe.prediction.multivariate import mv_population_stats

    if isinstance(g, BlockAutocov):
        return mv_population_stats(g, rtol=rtol)
    return durbin_levinson(g, rtol=rtol)
