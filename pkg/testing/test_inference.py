import math

import numpy as np
import pytest

from pivotfpe import inference
from pivotfpe.exceptions import AlphaNotTabulated
from pivotfpe.exceptions import DegenerateNormalizer
from pivotfpe.inference import Measure
from pivotfpe.inference import MeasureEstimate
from pivotfpe.pivot import WQuantileTable
from pivotfpe.prediction import SequentialEstimator
from pivotfpe.processes import load_spec
from pivotfpe.processes import ProcessSpec
from pivotfpe.processes import simulate
from pivotfpe.processes import true_autocov
from pivotfpe.selfnorm import Normalizer
from pivotfpe.selfnorm import NormalizerKind
from pivotfpe.series import LambdaGrid
from pivotfpe.series import SequentialPath


HALF = LambdaGrid([0.5, 1.0])
FIXED_TABLE = WQuantileTable(
    alphas=(0.05, 0.95),
    quantiles=(-1.6, 1.6),
    replicates=1,
    bm_steps=2,
    seed=0,
    standard_errors=(0.0, 0.0),
)


def _estimate(measure, estimate, v, p=1):
    path = SequentialPath(HALF, [estimate, estimate])
    normalizer = Normalizer(v, HALF, NormalizerKind.WEIGHTED, scale=1.0)
    return MeasureEstimate(Measure(measure), p, estimate, normalizer, path)


@pytest.fixture
def ar1():
    return simulate(ProcessSpec.ar([0.8]), 1000, seed=3)


@pytest.fixture
def white_noise():
    return simulate(load_spec("white-noise"), 1000, seed=4)


def test_lower_bound_arithmetic():
    est = _estimate("s", 0.4, 0.05)
    assert inference.lower_bound(est, 0.05, FIXED_TABLE) == pytest.approx(0.48)


def test_boundary_is_not_rejected():
    est = _estimate("s", 0.3, 0.05)
    outcome = inference.threshold_decision(est, 0.3, 0.05, FIXED_TABLE)
    assert not outcome.reject
    assert outcome.statistic == 0.0
    assert outcome.critical == -1.6


def test_reject_is_inclusive():
    table = FIXED_TABLE._replace(quantiles=(-1.5, 1.5))
    est = _estimate("s", 0.25, 0.25)
    # 0.25 + 1.5 * 0.25 is exact in binary
    assert inference.threshold_decision(est, 0.625, 0.05, table).reject


def test_zero_normalizer_is_an_error():
    est = _estimate("s", 0.4, 0.0)
    with pytest.raises(DegenerateNormalizer):
        inference.lower_bound(est, 0.05, FIXED_TABLE)


def test_interval_width(ar1, small_table):
    est = inference.estimate_measure(ar1, "s", 1)
    ci = inference.interval(est, 0.1, small_table)
    critical = small_table.quantile(0.95)
    assert ci.critical == critical
    assert ci.width == pytest.approx(2 * critical * est.normalizer.value)
    assert est.estimate in ci
    assert ci.level == pytest.approx(0.9)
    assert ci.lower < ci.upper


@pytest.mark.parametrize("reflected, base", [("r2", "s"), ("kappa2", "q")])
def test_reflected_intervals(ar1, small_table, reflected, base):
    ci_base = inference.ci(ar1, base, 2, 0.1, small_table)
    ci_reflected = inference.ci(ar1, reflected, 2, 0.1, small_table)
    assert ci_reflected.lower == 1 - ci_base.upper
    assert ci_reflected.upper == 1 - ci_base.lower
    assert ci_reflected.estimate == pytest.approx(1 - ci_base.estimate)


@pytest.mark.parametrize("measure", ["m", "s", "q", "kappa"])
def test_interval_contains_estimate(ar1, small_table, measure):
    ci = inference.ci(ar1, measure, 1, 0.05, small_table)
    assert ci.lower <= ci.estimate <= ci.upper
    assert ci.measure is Measure(measure)


def test_kappa_interval_covers_ar1_coefficient(ar1, small_table):
    assert 0.8 in inference.ci(ar1, "kappa", 1, 0.02, small_table)


def test_duality(ar1, small_table):
    for p in (1, 2):
        delta_hat = inference.delta_hat_alpha(ar1, "s", p, 0.1, small_table)
        for delta in np.linspace(0.01, 0.99, 99):
            if abs(delta - delta_hat) < 1e-9:
                continue
            outcome = inference.test_threshold(ar1, "s", p, delta, 0.1, small_table)
            assert outcome.reject == (delta >= delta_hat)


def test_statistic_is_studentized(ar1, small_table):
    est = inference.estimate_measure(ar1, "q", 2)
    outcome = inference.threshold_decision(est, 0.5, 0.05, small_table)
    assert outcome.statistic == pytest.approx((est.estimate - 0.5) / est.normalizer.value)
    assert outcome.reject == (outcome.statistic <= outcome.critical)


def test_scale_invariance(ar1, small_table):
    for measure in ("s", "q", "kappa"):
        base = inference.estimate_measure(ar1, measure, 2)
        scaled = inference.estimate_measure(ar1.scaled(-4.0), measure, 2)
        assert scaled.estimate == pytest.approx(base.estimate, rel=1e-9)
        assert scaled.normalizer.value == pytest.approx(base.normalizer.value, rel=1e-9)


def test_m_normalizer_scales(ar1):
    base = inference.estimate_measure(ar1, "m", 1)
    scaled = inference.estimate_measure(ar1.scaled(3.0), "m", 1)
    assert scaled.estimate == pytest.approx(9 * base.estimate)
    assert scaled.normalizer.value == pytest.approx(9 * base.normalizer.value)


@pytest.mark.parametrize(
    "measure, p, centered",
    [("m", 0, True), ("s", 1, False), ("s", 2, True), ("kappa", 1, False), ("q", 2, False)],
)
def test_constant_series_is_degenerate(small_table, measure, p, centered):
    with pytest.raises(DegenerateNormalizer):
        inference.ci(np.full(100, 3.0), measure, p, 0.1, small_table, centered=centered)


def test_constant_channel_is_degenerate(rng, small_table):
    x = np.column_stack([rng.standard_normal(200), np.full(200, -1.0)])
    with pytest.raises(DegenerateNormalizer):
        inference.test_threshold(x, "mv-s", 1, 0.5, 0.1, small_table)


def test_untabulated_alpha(ar1, small_table):
    with pytest.raises(AlphaNotTabulated):
        inference.ci(ar1, "s", 1, 0.123, small_table)


@pytest.mark.parametrize(
    "call",
    [
        lambda x, t: inference.ci(x, "s", 1, 0.0, t),
        lambda x, t: inference.test_threshold(x, "s", 1, 1.2, 0.05, t),
        lambda x, t: inference.test_threshold(x, "kappa", 1, 0.5, 0.05, t),
        lambda x, t: inference.estimate_measure(x, "q", 0),
        lambda x, t: inference.estimate_order(x, "s", 1.5, 0.1, t),
        lambda x, t: inference.estimate_order(x, "s", 0.5, 1.0, t),
        lambda x, t: inference.estimate_order(x, "kappa", 0.5, 0.1, t),
        lambda x, t: inference.estimate_order(x, "s", 0.5, 0.1, t, p_max=0),
        lambda x, t: inference.test_pstar_leq(x, "s", 0, 0.5, 0.1, t),
        lambda x, t: inference.test_pstar_gt(x, "s", 0, 0.5, 0.1, t),
        lambda x, t: inference.delta_hat_alpha(x, "m", 1, 0.1, t),
    ],
)
def test_invalid_arguments(ar1, small_table, call):
    with pytest.raises(ValueError):
        call(ar1, small_table)


def test_order_estimate_finds_ar1(ar1, small_table):
    order = inference.estimate_order(ar1, "s", 0.5, 0.1, small_table, p_max=5)
    assert order.found
    assert order.p_hat == 1
    assert len(order.steps) == 1
    step = order.steps[0]
    assert step.accepted
    assert step.bound == pytest.approx(0.5 - order.critical * step.normalizer)


def test_order_estimate_white_noise(white_noise, small_table):
    order = inference.estimate_order(white_noise, "s", 0.5, 0.1, small_table, p_max=5)
    assert not order.found
    assert [step.p for step in order.steps] == [1, 2, 3, 4, 5]
    assert not any(step.accepted for step in order.steps)


def test_order_estimate_default_p_max(white_noise, small_table):
    order = inference.estimate_order(white_noise, "q", 0.5, 0.1, small_table)
    assert order.p_max == 20


def test_order_estimate_accepts_estimator(ar1, small_table):
    estimator = SequentialEstimator(ar1)
    direct = inference.estimate_order(ar1, "s", 0.5, 0.1, small_table, p_max=3)
    reused = inference.estimate_order(estimator, "s", 0.5, 0.1, small_table, p_max=3)
    assert direct == reused


def test_pstar_leq(ar1, white_noise, small_table):
    outcome = inference.test_pstar_leq(ar1, "s", 1, 0.5, 0.1, small_table, p_max=5)
    assert not outcome.reject
    assert outcome.statistic == 1.0
    outcome = inference.test_pstar_leq(white_noise, "s", 1, 0.5, 0.1, small_table, p_max=5)
    assert outcome.reject
    assert math.isinf(outcome.statistic)
    assert outcome.order.p_hat is None


def test_pstar_gt_is_threshold_test(ar1, small_table):
    for p0 in (1, 2, 3):
        for nu in (0.3, 0.6, 0.7):
            gt = inference.test_pstar_gt(ar1, "s", p0, nu, 0.05, small_table)
            threshold = inference.test_threshold(ar1, "s", p0, 1 - nu, 0.05, small_table)
            assert gt.reject == threshold.reject
            assert gt.reject == (gt.statistic <= gt.critical)


def test_multivariate_measures(rng, small_table):
    x = rng.standard_normal((500, 2))
    ci = inference.ci(x, "mv-s", 1, 0.1, small_table)
    assert ci.lower <= ci.estimate <= ci.upper
    outcome = inference.test_threshold(x, "mv-s", 1, 0.5, 0.05, small_table)
    assert not outcome.reject
    order = inference.estimate_order(x, "mv-s", 0.5, 0.1, small_table, p_max=3)
    assert not order.found


@pytest.mark.slow
def test_kappa_coverage_ar2(full_table):
    spec = load_spec("ar2")
    kappa = true_autocov(spec, 2).kappa[1]
    covered = [
        kappa in inference.ci(simulate(spec, 500, seed=1, replicate=r), "kappa", 2, 0.1, full_table)
        for r in range(1000)
    ]
    assert np.mean(covered) == pytest.approx(0.9, abs=0.03)


@pytest.mark.slow
@pytest.mark.parametrize(
    "name, coverage, length, length_tol",
    [("ar2", 0.903, 0.129, 0.02), ("ar6", 0.901, 0.158, 0.03)],
)
def test_kappa2_interval_at_n1000(full_table, name, coverage, length, length_tol):
    spec = load_spec(name)
    kappa = true_autocov(spec, 2).kappa[1]
    intervals = [
        inference.ci(simulate(spec, 1000, seed=5, replicate=r), "kappa", 2, 0.1, full_table)
        for r in range(1000)
    ]
    assert np.mean([kappa in i for i in intervals]) == pytest.approx(coverage, abs=0.03)
    assert np.mean([i.upper - i.lower for i in intervals]) == pytest.approx(length, abs=length_tol)


@pytest.mark.slow
def test_threshold_rejection_ma_poly(full_table):
    spec = load_spec("ma-poly")
    s2 = true_autocov(spec, 2).s[2]
    bounds = np.array(
        [
            inference.lower_bound(
                inference.estimate_measure(simulate(spec, 1000, 2, r), "s", 2), 0.05, full_table
            )
            for r in range(1000)
        ]
    )
    assert 0.025 <= np.mean(bounds <= s2) <= 0.085
    assert np.mean(bounds <= s2 - 0.15) <= 0.01
    assert np.mean(bounds <= s2 + 0.15) >= 0.95


@pytest.mark.slow
def test_multivariate_threshold_level_var3(full_table):
    spec = load_spec("var3")
    delta = true_autocov(spec, 1).s[1]
    rejections = [
        inference.test_threshold(simulate(spec, 1000, 6, r), "mv-s", 1, delta, 0.1, full_table)
        .reject
        for r in range(500)
    ]
    assert np.mean(rejections) == pytest.approx(0.1, abs=0.05)


@pytest.mark.slow
def test_order_estimate_ar5(full_table):
    spec = load_spec("ar5")
    orders = [
        inference.estimate_order(simulate(spec, 1000, 3, r), "s", 0.6, 0.1, full_table)
        for r in range(1000)
    ]
    # not found counts as overestimation
    estimates = np.array([np.inf if o.p_hat is None else o.p_hat for o in orders])
    values, counts = np.unique(estimates, return_counts=True)
    assert values[np.argmax(counts)] == 3
    assert np.mean(estimates > 3) <= 0.13
    assert np.mean(estimates < 3) <= 0.05


def _cdf_distance(statistics, table):
    statistics = np.sort(statistics)
    below = np.searchsorted(statistics, table.quantiles, side="right") / len(statistics)
    return float(np.max(np.abs(below - np.asarray(table.alphas))))


@pytest.mark.slow
@pytest.mark.parametrize(
    "spec, measure, p, target",
    [
        (load_spec("white-noise"), "m", 0, 1.0),
        (ProcessSpec.ar([0.5]), "kappa", 1, 0.5),
    ],
    ids=["white-noise-m0", "ar1-kappa1"],
)
def test_studentized_statistic_follows_table(full_table, spec, measure, p, target):
    grid = LambdaGrid.uniform(100)
    statistics = []
    for r in range(2000):
        est = inference.estimate_measure(simulate(spec, 2000, 4, r), measure, p, grid)
        statistics.append((est.estimate - target) / est.normalizer.positive())
    assert _cdf_distance(statistics, full_table) < 0.05
