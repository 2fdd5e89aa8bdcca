import os

import numpy as np
import pytest

from pivotfpe.config import default_workers
from pivotfpe.pivot import build_table
from pivotfpe.prediction import autocov_from_kappa
from pivotfpe.processes import ProcessSpec
from pivotfpe.processes import true_autocov


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run the Monte Carlo acceptance checks, can also be set in env with RUN_SLOW",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow") or os.environ.get("RUN_SLOW"):
        return
    skip_slow = pytest.mark.skip(reason="Monte Carlo check, use --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def small_table():
    """A coarse table, good enough for everything that does not test the quantiles themselves."""
    return build_table(replicates=10_000, bm_steps=500, seed=7)


@pytest.fixture(scope="session")
def full_table():
    return build_table(workers=default_workers())


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def random_autocov(rng):
    """Random positive definite autocovariance vectors built from reflection coefficients."""

    def _make(p):
        kappa = rng.uniform(-0.9, 0.9, size=p)
        return autocov_from_kappa(rng.uniform(0.5, 3.0), kappa)

    return _make


@pytest.fixture
def random_block_autocov(rng):
    """Population block autocovariances of a random stable VAR(1) with a random innovation
    covariance, so every block Toeplitz matrix is positive definite."""

    def _make(d, p):
        a = rng.standard_normal((d, d))
        a *= rng.uniform(0.2, 0.8) / max(abs(np.linalg.eigvals(a)))
        root = rng.standard_normal((d, d))
        cov = root @ root.T + d * np.eye(d)
        return true_autocov(ProcessSpec.var([a], cov=cov), p).autocov

    return _make
