"""Prediction errors, relative prediction errors and partial autocorrelations."""

from .base import AutocovVector
from .base import autocov_from_kappa
from .base import durbin_levinson
from .base import durbin_levinson_batch
from .base import DurbinLevinsonResult
from .base import kappa_explicit
from .base import mp_det_ratio
from .base import population_stats
from .base import step_up
from .multivariate import BlockAutocov
from .multivariate import MultiSequentialEstimator
from .multivariate import MultivariateStats
from .multivariate import mv_m_det_ratio
from .multivariate import mv_m_hat
from .multivariate import mv_m_path
from .multivariate import mv_m_schur
from .multivariate import mv_population_stats
from .multivariate import mv_q_path
from .multivariate import mv_s_path
from .paths import kappa_path
from .paths import m_path
from .paths import q_path
from .paths import s_path
from .paths import SequentialEstimator

__all__ = [
    "AutocovVector",
    "autocov_from_kappa",
    "durbin_levinson",
    "durbin_levinson_batch",
    "DurbinLevinsonResult",
    "kappa_explicit",
    "mp_det_ratio",
    "population_stats",
    "step_up",
    "BlockAutocov",
    "MultiSequentialEstimator",
    "MultivariateStats",
    "mv_m_det_ratio",
    "mv_m_hat",
    "mv_m_path",
    "mv_m_schur",
    "mv_population_stats",
    "mv_q_path",
    "mv_s_path",
    "kappa_path",
    "m_path",
    "q_path",
    "s_path",
    "SequentialEstimator",
]
