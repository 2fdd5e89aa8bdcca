"""Pivotal confidence intervals, threshold tests and order estimation.

Every procedure studentizes a full-sample estimate with the self-normalizer of its sequential
path and compares it with quantiles ``q_alpha`` of the pivot ``W``:

* confidence intervals are ``estimate -/+ q_{1 - alpha/2} V``;
* the threshold test of ``H0: measure > delta`` rejects when ``estimate - q_alpha V <= delta``
  (``q_alpha < 0`` for ``alpha < 0.5``);
* the order estimate is the smallest ``p`` with ``S_p < 1 - nu - q_alpha V_p``.

The functions accept a sample or an already built :py:class:`SequentialEstimator` /
:py:class:`MultiSequentialEstimator`, so repeated decisions on one sample share the sequential
autocovariances.
"""

import logging
import math
from enum import Enum
from typing import NamedTuple
from typing import Optional
from typing import Tuple

import numpy as np

from .config import default_p_max
from .exceptions import DegenerateNormalizer
from .exceptions import PathSingular
from .log import create_item_logger
from .log import create_logger
from .pivot import WQuantileTable
from .prediction import MultiSequentialEstimator
from .prediction import SequentialEstimator
from .selfnorm import Normalizer
from .selfnorm import v_plain
from .selfnorm import v_weighted
from .series import SequentialPath
from .types import GridInput


class Measure(Enum):
    """The measures of prediction quality that can be estimated and tested."""

    M = "m"
    S = "s"
    R2 = "r2"
    Q = "q"
    KAPPA = "kappa"
    KAPPA_SQ = "kappa2"
    MV_M = "mv-m"
    MV_S = "mv-s"
    MV_Q = "mv-q"

    @property
    def is_multivariate(self) -> bool:
        return self in (Measure.MV_M, Measure.MV_S, Measure.MV_Q)

    @property
    def is_relative(self) -> bool:
        """Scale-free measures, whose thresholds lie in ``(0, 1)``."""
        return self not in (Measure.M, Measure.MV_M)

    @property
    def min_order(self) -> int:
        return 1 if self in (Measure.Q, Measure.KAPPA, Measure.KAPPA_SQ, Measure.MV_Q) else 0


THRESHOLD_MEASURES = (Measure.S, Measure.Q, Measure.MV_M, Measure.MV_S, Measure.MV_Q)
ORDER_MEASURES = (Measure.S, Measure.Q, Measure.MV_S)


class MeasureEstimate(NamedTuple):
    """A full-sample estimate with its self-normalizer and sequential path."""

    measure: Measure
    p: int
    estimate: float
    normalizer: Normalizer
    path: SequentialPath


class ConfidenceInterval(NamedTuple):
    lower: float
    upper: float
    level: float
    measure: Measure
    p: int
    estimate: float
    normalizer: float
    critical: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper


class OrderStep(NamedTuple):
    p: int
    estimate: float
    normalizer: float
    bound: float
    accepted: bool


class OrderEstimate(NamedTuple):
    """Result of the order search; ``p_hat is None`` means no order up to ``p_max`` qualified."""

    p_hat: Optional[int]
    p_max: int
    nu: float
    alpha: float
    measure: Measure
    critical: float
    steps: Tuple[OrderStep, ...]

    @property
    def found(self) -> bool:
        return self.p_hat is not None


class TestOutcome(NamedTuple):
    """A test decision.

    For the threshold tests ``statistic`` is the studentized estimate, for the test of
    ``p* <= p0`` it is the order estimate (infinite when none was found).
    """

    reject: bool
    statistic: float
    critical: float
    threshold: float
    alpha: float
    measure: Measure
    p: int
    estimate: float
    normalizer: float
    order: Optional[OrderEstimate] = None


def _check_probability(name: str, value: float) -> None:
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


def estimator_for(x, measure: Measure, grid: GridInput = None, centered: bool = False):
    """The sequential estimator a measure needs; an existing estimator is passed through."""
    if measure.is_multivariate:
        if isinstance(x, MultiSequentialEstimator):
            return x
        return MultiSequentialEstimator(x, grid, centered)
    if isinstance(x, SequentialEstimator):
        return x
    return SequentialEstimator(x, grid, centered)


def _check_not_constant(estimator) -> None:
    # uncentered constant samples have paths that do not vanish but carry no information
    values = estimator.series.values
    if np.any(np.ptp(values, axis=0) == 0):
        raise DegenerateNormalizer(
            "the sample has a constant channel, its self-normalizers are degenerate"
        )


def estimate_measure(
    x, measure, p: int, grid: GridInput = None, centered: bool = False
) -> MeasureEstimate:
    """The full-sample estimate of a measure at order ``p`` and its self-normalizer.

    ``R2`` and ``KAPPA_SQ`` are carried on the ``S`` and ``Q`` paths: their estimates are
    ``1 - S_p`` and ``1 - Q_p`` and their normalizers those of the ``S`` and ``Q`` paths.
    """
    measure = Measure(measure)
    if p < measure.min_order:
        raise ValueError(f"measure {measure.value} needs an order p >= {measure.min_order}")
    estimator = estimator_for(x, measure, grid, centered)
    _check_not_constant(estimator)
    if measure in (Measure.M, Measure.MV_M):
        path = estimator.m_path(p)
        return MeasureEstimate(measure, p, path.at_one, v_plain(path), path)
    if measure in (Measure.S, Measure.R2, Measure.MV_S):
        path = estimator.s_path(p)
    elif measure in (Measure.Q, Measure.KAPPA_SQ, Measure.MV_Q):
        path = estimator.q_path(p)
    else:
        path = estimator.kappa_path(p)
    estimate = path.at_one
    if measure in (Measure.R2, Measure.KAPPA_SQ):
        estimate = 1.0 - estimate
    return MeasureEstimate(measure, p, estimate, v_weighted(path), path)


def interval(est: MeasureEstimate, alpha: float, table: WQuantileTable) -> ConfidenceInterval:
    """The ``1 - alpha`` interval of an estimate; ``R2`` and ``KAPPA_SQ`` intervals are the
    reflections ``1 - upper``, ``1 - lower`` of the ``S`` and ``Q`` intervals."""
    _check_probability("alpha", alpha)
    critical = table.quantile(1 - alpha / 2)
    v = est.normalizer.positive()
    if est.measure in (Measure.R2, Measure.KAPPA_SQ):
        base = est.path.at_one
        lower, upper = 1.0 - (base + critical * v), 1.0 - (base - critical * v)
    else:
        lower, upper = est.estimate - critical * v, est.estimate + critical * v
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        level=1 - alpha,
        measure=est.measure,
        p=est.p,
        estimate=est.estimate,
        normalizer=v,
        critical=critical,
    )


def _check_threshold(measure: Measure, delta: float) -> None:
    if measure not in THRESHOLD_MEASURES:
        raise ValueError(f"no threshold test for measure {measure.value}")
    if measure.is_relative:
        _check_probability("delta", delta)
    elif not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")


def lower_bound(est: MeasureEstimate, alpha: float, table: WQuantileTable) -> float:
    """``estimate - q_alpha V``, the quantity every threshold decision compares."""
    return est.estimate - table.quantile(alpha) * est.normalizer.positive()


def threshold_decision(
    est: MeasureEstimate, delta: float, alpha: float, table: WQuantileTable
) -> TestOutcome:
    """Rejects ``H0: measure > delta`` when ``estimate - q_alpha V <= delta``."""
    _check_probability("alpha", alpha)
    _check_threshold(est.measure, delta)
    critical = table.quantile(alpha)
    v = est.normalizer.positive()
    return TestOutcome(
        reject=bool(est.estimate - critical * v <= delta),
        statistic=(est.estimate - delta) / v,
        critical=critical,
        threshold=delta,
        alpha=alpha,
        measure=est.measure,
        p=est.p,
        estimate=est.estimate,
        normalizer=v,
    )


def ci(
    x,
    measure,
    p: int,
    alpha: float,
    table: WQuantileTable,
    grid: GridInput = None,
    centered: bool = False,
) -> ConfidenceInterval:
    """Pivotal ``1 - alpha`` confidence interval of ``measure`` at order ``p``."""
    return interval(estimate_measure(x, measure, p, grid, centered), alpha, table)


def test_threshold(
    x,
    measure,
    p: int,
    delta: float,
    alpha: float,
    table: WQuantileTable,
    grid: GridInput = None,
    centered: bool = False,
) -> TestOutcome:
    """Level-``alpha`` test of ``H0: measure_p > delta`` against ``H1: measure_p <= delta``."""
    measure = Measure(measure)
    _check_threshold(measure, delta)
    return threshold_decision(estimate_measure(x, measure, p, grid, centered), delta, alpha, table)


def delta_hat_alpha(
    x,
    measure,
    p: int,
    alpha: float,
    table: WQuantileTable,
    grid: GridInput = None,
    centered: bool = False,
) -> float:
    """``max(0, estimate - q_alpha V)``: the smallest threshold the test rejects at."""
    measure = Measure(measure)
    if measure not in THRESHOLD_MEASURES:
        raise ValueError(f"no threshold test for measure {measure.value}")
    _check_probability("alpha", alpha)
    return max(0.0, lower_bound(estimate_measure(x, measure, p, grid, centered), alpha, table))


def estimate_order(
    x,
    measure,
    nu: float,
    alpha: float,
    table: WQuantileTable,
    p_max: Optional[int] = None,
    grid: GridInput = None,
    centered: bool = False,
    logger: Optional[logging.Logger] = None,
) -> OrderEstimate:
    """The smallest ``p <= p_max`` with ``estimate_p < 1 - nu - q_alpha V_p``.

    Args:
        nu: Required share of explained variance, in ``(0, 1)``.
        p_max: Largest order searched, ``min(20, N // 4)`` by default.
    """
    measure = Measure(measure)
    if measure not in ORDER_MEASURES:
        raise ValueError(f"no order estimation for measure {measure.value}")
    _check_probability("nu", nu)
    _check_probability("alpha", alpha)
    logger = create_logger("estimate_order", logger)
    estimator = estimator_for(x, measure, grid, centered)
    if p_max is None:
        p_max = default_p_max(estimator.series.n)
    if p_max < 1:
        raise ValueError(f"p_max must be at least 1, got {p_max}")
    if isinstance(estimator, SequentialEstimator):
        estimator.autocov(p_max)
    else:
        estimator.crosscov(p_max)
    critical = table.quantile(alpha)
    steps = []
    p_hat = None
    for p in range(1, p_max + 1):
        item_logger = create_item_logger(logger, p)
        try:
            est = estimate_measure(estimator, measure, p)
        except PathSingular as e:
            item_logger.warning("order search aborted: %s", e)
            raise
        v = est.normalizer.positive()
        bound = 1.0 - nu - critical * v
        accepted = bool(est.estimate < bound)
        item_logger.debug("estimate %.6g, bound %.6g, accepted %s", est.estimate, bound, accepted)
        steps.append(OrderStep(p, est.estimate, v, bound, accepted))
        if accepted:
            p_hat = p
            break
    return OrderEstimate(p_hat, p_max, nu, alpha, measure, critical, tuple(steps))


def test_pstar_leq(
    x,
    measure,
    p0: int,
    nu: float,
    alpha: float,
    table: WQuantileTable,
    p_max: Optional[int] = None,
    grid: GridInput = None,
    centered: bool = False,
) -> TestOutcome:
    """Tests ``H0: p* <= p0``; rejects when the order estimate exceeds ``p0`` or is not found."""
    if p0 < 1:
        raise ValueError(f"p0 must be at least 1, got {p0}")
    order = estimate_order(x, measure, nu, alpha, table, p_max, grid, centered)
    statistic = math.inf if order.p_hat is None else float(order.p_hat)
    last = order.steps[-1]
    return TestOutcome(
        reject=order.p_hat is None or order.p_hat > p0,
        statistic=statistic,
        critical=order.critical,
        threshold=nu,
        alpha=alpha,
        measure=order.measure,
        p=p0,
        estimate=last.estimate,
        normalizer=last.normalizer,
        order=order,
    )


def test_pstar_gt(
    x,
    measure,
    p0: int,
    nu: float,
    alpha: float,
    table: WQuantileTable,
    grid: GridInput = None,
    centered: bool = False,
) -> TestOutcome:
    """Tests ``H0: p* > p0``, i.e. the threshold test at ``delta = 1 - nu`` and order ``p0``."""
    if p0 < 1:
        raise ValueError(f"p0 must be at least 1, got {p0}")
    _check_probability("nu", nu)
    measure = Measure(measure)
    if measure not in ORDER_MEASURES:
        raise ValueError(f"no order test for measure {measure.value}")
    return test_threshold(x, measure, p0, 1.0 - nu, alpha, table, grid, centered)
