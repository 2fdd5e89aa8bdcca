import json

import numpy as np
import pytest

from pivotfpe.config import DEFAULT_ALPHAS
from pivotfpe.config import TABLE_ENV
from pivotfpe.config import TABLE_SCHEMA_VERSION
from pivotfpe.exceptions import AlphaNotTabulated
from pivotfpe.exceptions import InsufficientReplicates
from pivotfpe.exceptions import SchemaMismatch
from pivotfpe.pivot import build_table
from pivotfpe.pivot import draw_w_sample
from pivotfpe.pivot import ensure_table
from pivotfpe.pivot import load
from pivotfpe.pivot import order_statistic_se
from pivotfpe.pivot import quantile
from pivotfpe.pivot import sample_w
from pivotfpe.pivot import store
from pivotfpe.pivot import WQuantileTable
from pivotfpe.utils import replicate_rng
from pivotfpe.utils import STREAM_W


def _tiny_table(**kwargs):
    options = dict(alphas=(0.1, 0.5, 0.9), replicates=300, bm_steps=50, seed=11, min_replicates=1)
    options.update(kwargs)
    return build_table(**options)


def test_sample_w_is_deterministic():
    first = sample_w(replicate_rng(5, 3, STREAM_W), 100)
    second = sample_w(replicate_rng(5, 3, STREAM_W), 100)
    assert first == second
    assert first != sample_w(replicate_rng(5, 4, STREAM_W), 100)


def test_sample_w_needs_two_steps(rng):
    with pytest.raises(ValueError):
        sample_w(rng, 1)


def test_draw_w_sample_ignores_workers():
    single, _ = draw_w_sample(40, bm_steps=20, seed=3, workers=1)
    pooled, _ = draw_w_sample(40, bm_steps=20, seed=3, workers=2)
    assert single.tolist() == pooled.tolist()


def test_build_table_is_deterministic():
    assert _tiny_table() == _tiny_table()
    assert _tiny_table().digest == _tiny_table().digest
    assert _tiny_table(seed=12) != _tiny_table()


def test_build_table_sorts_and_deduplicates_alphas():
    table = _tiny_table(alphas=(0.9, 0.1, 0.5, 0.1))
    assert table.alphas == (0.1, 0.5, 0.9)
    assert table.quantiles[0] < table.quantiles[1] < table.quantiles[2]
    assert len(table.standard_errors) == 3


def test_insufficient_replicates():
    with pytest.raises(InsufficientReplicates):
        build_table(replicates=100)


@pytest.mark.parametrize("alphas", [(), (0.0, 0.5), (0.5, 1.0)])
def test_invalid_alphas(alphas):
    with pytest.raises(ValueError):
        _tiny_table(alphas=alphas)


def test_lookup(small_table):
    assert quantile(small_table, 0.5) == small_table.quantiles[small_table.alphas.index(0.5)]
    # 1 - 0.1 / 2 is not bit-equal to 0.95
    assert small_table.quantile(1 - 0.1 / 2) == small_table.quantile(0.95)
    assert small_table.covers(DEFAULT_ALPHAS)
    assert not small_table.covers((0.5, 0.123))


def test_alpha_not_tabulated(small_table):
    with pytest.raises(AlphaNotTabulated) as e:
        small_table.quantile(0.123)
    assert "0.123" in str(e.value)


def test_store_load_round_trip(tmp_path, small_table):
    path = store(small_table, tmp_path / "nested" / "w.json")
    loaded = load(path)
    assert loaded == small_table
    assert loaded.digest == small_table.digest
    data = json.loads(path.read_text())
    assert data["schema_version"] == TABLE_SCHEMA_VERSION
    assert data["replicates"] == 10_000


def test_load_schema_mismatch(tmp_path, small_table):
    data = small_table.to_dict()
    data["schema_version"] = TABLE_SCHEMA_VERSION + 1
    path = tmp_path / "w.json"
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaMismatch):
        WQuantileTable.load(path)


@pytest.mark.parametrize("content", ["not json", "[1, 2]", '{"schema_version": 1}'])
def test_load_malformed(tmp_path, content):
    path = tmp_path / "w.json"
    path.write_text(content)
    with pytest.raises(SchemaMismatch):
        load(path)


def test_ensure_table_builds_then_reuses(tmp_path, monkeypatch):
    monkeypatch.setenv(TABLE_ENV, str(tmp_path / "cache.json"))
    options = dict(replicates=10_000, bm_steps=20, seed=1)
    table, built = ensure_table(alphas=(0.05,), **options)
    assert built
    assert (tmp_path / "cache.json").exists()
    assert table.covers(DEFAULT_ALPHAS)
    again, built = ensure_table(alphas=(0.05,), **options)
    assert not built
    assert again == table


def test_ensure_table_rebuilds_missing_alpha(tmp_path):
    path = _tiny_table().store(tmp_path / "w.json")
    table, built = ensure_table(path, alphas=(0.5,), replicates=10_000, bm_steps=20)
    assert not built
    table, built = ensure_table(path, alphas=(0.123,), replicates=10_000, bm_steps=20)
    assert built
    assert table.covers((0.123,) + DEFAULT_ALPHAS)
    assert load(path) == table


def test_order_statistic_se():
    sample = np.arange(1, 1001, dtype=float)
    (se,) = order_statistic_se(sample, (0.5,))
    assert 10 < se < 20


def test_median_and_symmetry(small_table):
    assert abs(small_table.quantile(0.5)) < 0.1
    for low, high in ((0.05, 0.95), (0.1, 0.9)):
        bound = 2 * (small_table.standard_error(low) + small_table.standard_error(high))
        assert abs(small_table.quantile(low) + small_table.quantile(high)) <= bound


def test_quantiles_increase(small_table):
    assert np.all(np.diff(small_table.quantiles) > 0)


@pytest.mark.slow
def test_full_table(full_table):
    assert abs(full_table.quantile(0.5)) < 0.02
    for alpha in (0.01, 0.025, 0.05, 0.1):
        bound = 2 * (full_table.standard_error(alpha) + full_table.standard_error(1 - alpha))
        assert abs(full_table.quantile(alpha) + full_table.quantile(1 - alpha)) <= bound


@pytest.mark.slow
def test_independent_seeds_agree():
    tables = [
        build_table(alphas=(0.95,), replicates=200_000, seed=seed, workers=4) for seed in (1, 2)
    ]
    assert abs(tables[0].quantile(0.95) - tables[1].quantile(0.95)) < 0.1


@pytest.mark.slow
def test_grid_resolution_stability():
    coarse, fine = (
        build_table(alphas=(0.95,), replicates=100_000, bm_steps=steps, seed=5, workers=4)
        for steps in (1000, 4000)
    )
    assert abs(coarse.quantile(0.95) - fine.quantile(0.95)) < 0.1
