"""Monte Carlo quantiles of the pivot

.. code-block:: text

    W = B(1) / int_0^1 |B(lambda) - lambda B(1)| d lambda

for a standard Brownian motion ``B``. Every confidence interval and test of the package takes its
critical values from a :py:class:`WQuantileTable`. Replicate ``r`` of a table always draws from
the generator derived from ``(seed, r)``, so a table does not depend on how the replicates were
split between workers.
"""

import json
import logging
import math
from pathlib import Path
from typing import Iterable
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Tuple

import numpy as np

from .config import DEFAULT_ALPHAS
from .config import DEFAULT_BM_STEPS
from .config import DEFAULT_REPLICATES
from .config import DEFAULT_TABLE_SEED
from .config import default_table_path
from .config import MIN_REPLICATES
from .config import TABLE_SCHEMA_VERSION
from .exceptions import AlphaNotTabulated
from .exceptions import InsufficientReplicates
from .exceptions import SchemaMismatch
from .log import create_logger
from .utils import dumps_17g
from .utils import map_chunks
from .utils import replicate_rng
from .utils import sha256_bytes
from .utils import STREAM_W

#: Tabulated alphas are matched up to this distance, so ``1 - 0.1 / 2`` finds ``0.95``
ALPHA_MATCH_TOL = 1e-12
#: Largest number of redraws of a single replicate with a vanishing denominator
MAX_RESAMPLES = 100

_FIELDS = (
    "schema_version",
    "alphas",
    "quantiles",
    "standard_errors",
    "replicates",
    "bm_steps",
    "seed",
    "resampled_count",
)


def _draw_w(rng: np.random.Generator, bm_steps: int) -> Tuple[float, int]:
    if bm_steps < 2:
        raise ValueError(f"bm_steps must be at least 2, got {bm_steps}")
    lam = np.arange(1, bm_steps + 1) / bm_steps
    for resampled in range(MAX_RESAMPLES):
        path = np.cumsum(rng.standard_normal(bm_steps)) / math.sqrt(bm_steps)
        denominator = float(np.mean(np.abs(path - lam * path[-1])))
        if denominator > 0:
            return float(path[-1]) / denominator, resampled
    raise ArithmeticError(f"{MAX_RESAMPLES} Brownian paths in a row had a zero denominator")


def sample_w(rng: np.random.Generator, bm_steps: int = DEFAULT_BM_STEPS) -> float:
    """One draw of ``W`` from a random walk with ``bm_steps`` Gaussian steps of variance
    ``1 / bm_steps``, the integral taken as the right-endpoint Riemann sum on the walk's grid.
    """
    return _draw_w(rng, bm_steps)[0]


def _draw_chunk(start: int, stop: int, seed: int, bm_steps: int) -> List[Tuple[float, int]]:
    return [_draw_w(replicate_rng(seed, r, STREAM_W), bm_steps) for r in range(start, stop)]


def draw_w_sample(
    replicates: int,
    bm_steps: int = DEFAULT_BM_STEPS,
    seed: int = DEFAULT_TABLE_SEED,
    workers: int = 1,
) -> Tuple[np.ndarray, int]:
    """All replicates of a table in replicate order, plus the number of resampled paths."""
    draws = map_chunks(_draw_chunk, replicates, seed, bm_steps, workers=workers)
    values = np.array([w for w, _ in draws])
    return values, int(sum(resampled for _, resampled in draws))


def order_statistic_se(sample: np.ndarray, alphas: Iterable[float]) -> Tuple[float, ...]:
    """Distribution-free standard errors of sample quantiles from the spread of the order
    statistics bracketing each quantile with 95% binomial coverage."""
    ordered = np.sort(np.asarray(sample, dtype=float))
    n = len(ordered)
    errors = []
    for alpha in alphas:
        half = 1.96 * math.sqrt(n * alpha * (1 - alpha))
        low = min(max(math.floor(n * alpha - half), 1), n)
        high = min(max(math.ceil(n * alpha + half), 1), n)
        errors.append(float(ordered[high - 1] - ordered[low - 1]) / (2 * 1.96))
    return tuple(errors)


class WQuantileTable(NamedTuple):
    """Quantiles of ``W`` with the provenance needed to rebuild them bit-identically."""

    alphas: Tuple[float, ...]
    quantiles: Tuple[float, ...]
    replicates: int
    bm_steps: int
    seed: int
    standard_errors: Tuple[float, ...] = ()
    resampled_count: int = 0
    schema_version: int = TABLE_SCHEMA_VERSION

    def index(self, alpha: float) -> int:
        for i, tabulated in enumerate(self.alphas):
            if abs(tabulated - alpha) <= ALPHA_MATCH_TOL:
                return i
        raise AlphaNotTabulated(alpha, self.alphas)

    def quantile(self, alpha: float) -> float:
        """``q_alpha(W)``; untabulated alphas are not interpolated."""
        return self.quantiles[self.index(alpha)]

    def standard_error(self, alpha: float) -> float:
        return self.standard_errors[self.index(alpha)]

    def covers(self, alphas: Iterable[float]) -> bool:
        try:
            for alpha in alphas:
                self.index(alpha)
        except AlphaNotTabulated:
            return False
        return True

    def to_dict(self) -> dict:
        return {field: getattr(self, field) for field in _FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "WQuantileTable":
        if not isinstance(data, dict):
            raise SchemaMismatch("a quantile table must be a JSON object")
        version = data.get("schema_version")
        if version != TABLE_SCHEMA_VERSION:
            raise SchemaMismatch(
                f"quantile table has schema version {version!r}, expected {TABLE_SCHEMA_VERSION}"
            )
        missing = [field for field in _FIELDS if field not in data]
        if missing:
            raise SchemaMismatch(f"quantile table lacks the fields {missing!r}")
        table = cls(
            alphas=tuple(float(a) for a in data["alphas"]),
            quantiles=tuple(float(q) for q in data["quantiles"]),
            replicates=int(data["replicates"]),
            bm_steps=int(data["bm_steps"]),
            seed=int(data["seed"]),
            standard_errors=tuple(float(s) for s in data["standard_errors"]),
            resampled_count=int(data["resampled_count"]),
            schema_version=int(version),
        )
        if not len(table.alphas) == len(table.quantiles) == len(table.standard_errors):
            raise SchemaMismatch("alphas, quantiles and standard_errors differ in length")
        return table

    def dumps(self) -> str:
        return dumps_17g(self.to_dict())

    @property
    def digest(self) -> str:
        """SHA-256 of the serialized table."""
        return sha256_bytes(self.dumps().encode("utf-8"))

    def store(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path) -> "WQuantileTable":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise SchemaMismatch(f"{path} is not a JSON quantile table: {e}")
        return cls.from_dict(data)


def quantile(table: WQuantileTable, alpha: float) -> float:
    return table.quantile(alpha)


def store(table: WQuantileTable, path) -> Path:
    return table.store(path)


def load(path) -> WQuantileTable:
    return WQuantileTable.load(path)


def build_table(
    alphas: Iterable[float] = DEFAULT_ALPHAS,
    replicates: int = DEFAULT_REPLICATES,
    bm_steps: int = DEFAULT_BM_STEPS,
    seed: int = DEFAULT_TABLE_SEED,
    workers: int = 1,
    min_replicates: int = MIN_REPLICATES,
    logger: Optional[logging.Logger] = None,
) -> WQuantileTable:
    """Simulates ``replicates`` draws of ``W`` and tabulates their type-7 sample quantiles.

    Args:
        alphas: Probabilities in ``(0, 1)``.
        replicates: Number of draws, at least ``min_replicates``.
        bm_steps: Steps of each simulated Brownian path.
        seed: Root seed; replicate ``r`` uses the stream derived from ``(seed, r)``.
        workers: Worker processes; the table does not depend on it.
    """
    logger = create_logger("build_table", logger)
    alphas = tuple(sorted({float(a) for a in alphas}))
    if not alphas or not all(0 < a < 1 for a in alphas):
        raise ValueError(f"alphas must lie in (0, 1), got {alphas!r}")
    if replicates < min_replicates:
        raise InsufficientReplicates(
            f"{replicates} replicates requested, at least {min_replicates} are needed"
        )
    logger.info(
        "drawing %d replicates of W (bm_steps=%d, seed=%d, workers=%d)",
        replicates,
        bm_steps,
        seed,
        workers,
    )
    sample, resampled = draw_w_sample(replicates, bm_steps, seed, workers)
    if resampled:
        logger.warning("%d Brownian paths had a zero denominator and were redrawn", resampled)
    quantiles = tuple(float(q) for q in np.quantile(sample, alphas))
    return WQuantileTable(
        alphas=alphas,
        quantiles=quantiles,
        replicates=int(replicates),
        bm_steps=int(bm_steps),
        seed=int(seed),
        standard_errors=order_statistic_se(sample, alphas),
        resampled_count=resampled,
    )


def ensure_table(
    path=None,
    alphas: Iterable[float] = DEFAULT_ALPHAS,
    replicates: int = DEFAULT_REPLICATES,
    bm_steps: int = DEFAULT_BM_STEPS,
    seed: int = DEFAULT_TABLE_SEED,
    workers: int = 1,
    logger: Optional[logging.Logger] = None,
) -> Tuple[WQuantileTable, bool]:
    """Loads the cached table at ``path`` or builds and stores one covering ``alphas``.

    Returns:
        The table and whether it was built by this call.
    """
    logger = create_logger("ensure_table", logger)
    path = Path(path) if path is not None else default_table_path()
    alphas = tuple(alphas)
    if path.exists():
        table = WQuantileTable.load(path)
        if table.covers(alphas):
            logger.debug("using the quantile table at %s", path)
            return table, False
        logger.info("quantile table at %s lacks some of %r, rebuilding", path, alphas)
    table = build_table(
        set(alphas) | set(DEFAULT_ALPHAS),
        replicates=replicates,
        bm_steps=bm_steps,
        seed=seed,
        workers=workers,
        logger=logger,
    )
    table.store(path)
    logger.info("stored the quantile table at %s", path)
    return table, True
