"""Self-normalizers of sequential paths and the studentized statistics built from them.

Both normalizers are right-endpoint Riemann sums over the path's grid, with the weight of a
point equal to its distance from the previous point (``1/G`` on a uniform grid). The
``lambda = 0`` value of a path is not integrated.

* plain (for ``M_p``): ``sum_i w_i |path(lambda_i) - lambda_i path(1)|``
* weighted (for ``S_p``, ``Q_p``, ``kappa_p`` and the multivariate ``SS_p``):
  ``sum_i w_i lambda_i |path(lambda_i) - path(1)|``
"""

from enum import Enum

import numpy as np

from .config import NORMALIZER_RTOL
from .exceptions import DegenerateNormalizer
from .series import LambdaGrid
from .types import PathLike


class NormalizerKind(Enum):
    PLAIN = "plain"
    WEIGHTED = "weighted"


class Normalizer:
    """A self-normalizer value together with the grid it was integrated over.

    Args:
        value: The Riemann sum, non-negative.
        grid: The grid of the integrated path.
        kind: Which of the two sums produced the value.
        scale: Largest absolute path value; values below ``rtol * scale`` count as zero.
    """

    def __init__(
        self,
        value: float,
        grid: LambdaGrid,
        kind: NormalizerKind,
        scale: float,
        rtol: float = NORMALIZER_RTOL,
    ):
        if value < 0:
            raise ValueError(f"a normalizer cannot be negative, got {value!r}")
        self.value = float(value)
        self.grid = grid
        self.kind = kind
        self.scale = float(scale)
        self.rtol = rtol

    @property
    def is_degenerate(self) -> bool:
        return self.value <= self.rtol * self.scale

    def positive(self) -> float:
        """The value, or :py:class:`pivotfpe.exceptions.DegenerateNormalizer` if it is zero."""
        if self.is_degenerate:
            raise DegenerateNormalizer(
                f"{self.kind.value} self-normalizer vanishes ({self.value!r} at path scale "
                f"{self.scale!r}); the sample is degenerate, e.g. constant"
            )
        return self.value

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.value!r}, kind={self.kind.value!r})"


def _scale(path: PathLike) -> float:
    return float(np.max(np.abs(path.values))) if len(path.values) else 0.0


def v_plain(path: PathLike, rtol: float = NORMALIZER_RTOL) -> Normalizer:
    grid = path.grid
    values = np.asarray(path.values, dtype=float)
    integrand = np.abs(values - grid.points * values[-1])
    value = float(np.dot(grid.weights, integrand))
    return Normalizer(value, grid, NormalizerKind.PLAIN, _scale(path), rtol)


def v_weighted(path: PathLike, rtol: float = NORMALIZER_RTOL) -> Normalizer:
    grid = path.grid
    values = np.asarray(path.values, dtype=float)
    integrand = grid.points * np.abs(values - values[-1])
    value = float(np.dot(grid.weights, integrand))
    return Normalizer(value, grid, NormalizerKind.WEIGHTED, _scale(path), rtol)


def normalizer_for(path: PathLike, kind: NormalizerKind, rtol: float = NORMALIZER_RTOL):
    if kind is NormalizerKind.PLAIN:
        return v_plain(path, rtol)
    return v_weighted(path, rtol)


def studentize(estimate: float, target: float, v: Normalizer) -> float:
    """``(estimate - target) / V``."""
    return (float(estimate) - float(target)) / v.positive()
