"""Package-wide defaults.

Every public function takes the relevant value as a keyword argument defaulting to the constant
here, so nothing below has to be monkeypatched to change behaviour.
"""

import os
from pathlib import Path

#: Number of points of the default uniform lambda grid, k/20 for k = 1..20
DEFAULT_GRID_POINTS = 20
#: An intermediate prediction error below ``SINGULAR_RTOL * gamma_0`` counts as singular
SINGULAR_RTOL = 1e-12
#: A self-normalizer below ``NORMALIZER_RTOL * scale`` counts as zero
NORMALIZER_RTOL = 1e-12
#: Largest tolerated asymmetry for :py:func:`pivotfpe.series.vech`
SYMMETRY_TOL = 1e-10

DEFAULT_BM_STEPS = 2000
DEFAULT_REPLICATES = 200_000
MIN_REPLICATES = 10_000
DEFAULT_ALPHAS = (0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99)
DEFAULT_TABLE_SEED = 20240901
TABLE_SCHEMA_VERSION = 1

P_MAX_CAP = 20

TABLE_ENV = "PIVOTFPE_TABLE"
WORKERS_ENV = "PIVOTFPE_WORKERS"


def default_p_max(n: int) -> int:
    """Largest order searched by the order estimator for a sample of length ``n``."""
    return max(1, min(P_MAX_CAP, n // 4))


def default_table_path() -> Path:
    """Location of the cached W quantile table, ``$PIVOTFPE_TABLE`` taking precedence."""
    env = os.environ.get(TABLE_ENV)
    if env:
        return Path(env).expanduser()
    return Path("~/.cache/pivotfpe/w_table.json").expanduser()


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1
