"""Data-generating processes: simulation and exact population autocovariances.

Three kinds of stationary processes are supported, all driven by i.i.d. innovations with zero
mean and finite fourth moments:

* ``MA_INF``: ``X_k = sum_{j>=0} theta_j eps_{k-j}``, the coefficients given as a list or as a
  named decay rule that is truncated at ``J``;
* ``AR``: ``X_k = phi_1 X_{k-1} + ... + phi_p X_{k-p} + eps_k`` (``p = 0`` is white noise);
* ``VAR``: ``X_k = Phi_1 X_{k-1} + ... + Phi_P X_{k-P} + eps_k`` in ``R^d``.

Autocovariances follow the convention ``Gamma_h = E(X_0 X_h^T)``.
"""

import functools
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Union

import numpy as np
from cached_property import cached_property
from scipy.linalg import solve_discrete_lyapunov
from scipy.signal import fftconvolve
from scipy.signal import lfilter

from .exceptions import NonStationarySpec
from .exceptions import UnknownProcess
from .log import create_logger
from .prediction import AutocovVector
from .prediction import BlockAutocov
from .prediction import population_stats
from .series import MultiSeries
from .series import TimeSeries
from .utils import map_chunks
from .utils import replicate_rng
from .utils import STREAM_SIM

#: Neglected MA tail mass allowed, relative to the total absolute coefficient mass
MA_TAIL_RTOL = 1e-10
#: Largest residual of the stationary covariance equation accepted for VAR specs
LYAPUNOV_TOL = 1e-10
MIN_BURN_IN = 1000
BURN_IN_PER_LAG = 50


class ProcessKind(Enum):
    MA_INF = "ma-inf"
    AR = "ar"
    VAR = "var"


class MaRule:
    """A named MA coefficient rule: ``head`` for ``j < head_length``, a decaying tail after."""

    name = None

    def __init__(self, head: float, head_length: int = 4):
        self.head = head
        self.head_length = head_length

    def tail(self, j: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail_bound(self, truncation: int) -> float:
        """An upper bound of ``sum_{j > truncation} |theta_j|``."""
        raise NotImplementedError

    def coefficients(self, truncation: int) -> np.ndarray:
        j = np.arange(truncation + 1)
        out = np.empty(truncation + 1)
        head = j < self.head_length
        out[head] = self.head
        out[~head] = self.tail(j[~head])
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class PolynomialDecay(MaRule):
    """``theta_j = (j - shift) ** -power`` in the tail."""

    def __init__(self, name: str, head: float, power: int, shift: int, head_length: int = 4):
        super().__init__(head, head_length)
        self.name = name
        self.power = power
        self.shift = shift

    def tail(self, j):
        return (j - self.shift).astype(float) ** -self.power

    def tail_bound(self, truncation):
        base = truncation - self.shift
        return base ** (1 - self.power) / (self.power - 1)


class GeometricDecay(MaRule):
    """``theta_j = rate ** j`` in the tail."""

    def __init__(self, name: str, head: float, rate: float, head_length: int = 4):
        super().__init__(head, head_length)
        self.name = name
        self.rate = rate

    def tail(self, j):
        return self.rate ** j.astype(float)

    def tail_bound(self, truncation):
        return self.rate ** (truncation + 1) / (1 - self.rate)


MA_RULES: Dict[str, MaRule] = {
    "poly4": PolynomialDecay("poly4", head=1.0, power=4, shift=2),
    "geom085": GeometricDecay("geom085", head=2 / 3, rate=0.85),
}


class Innovation(NamedTuple):
    """Innovation law: ``normal`` or ``student-t`` (``df > 4``, rescaled to unit variance),
    multiplied by ``sd`` or by the Cholesky factor of ``cov``."""

    dist: str = "normal"
    sd: float = 1.0
    cov: Optional[tuple] = None
    df: Optional[float] = None

    def covariance(self, d: int) -> np.ndarray:
        if self.cov is not None:
            return np.array(self.cov, dtype=float)
        return self.sd**2 * np.eye(d)

    def validate(self, d: int) -> None:
        if self.dist not in ("normal", "student-t"):
            raise ValueError(f"unknown innovation distribution {self.dist!r}")
        if self.dist == "student-t" and not (self.df is not None and self.df > 4):
            raise ValueError("student-t innovations need df > 4 for finite fourth moments")
        if self.cov is not None:
            cov = self.covariance(d)
            if cov.shape != (d, d):
                raise ValueError(f"innovation covariance must be {d}x{d}, got {cov.shape}")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError("innovation covariance must be positive definite")
        elif not self.sd > 0:
            raise ValueError(f"innovation sd must be positive, got {self.sd!r}")

    def draw(self, rng: np.random.Generator, size: int, d: int) -> np.ndarray:
        """``(size, d)`` innovations."""
        if self.dist == "normal":
            raw = rng.standard_normal((size, d))
        else:
            raw = rng.standard_t(self.df, (size, d)) * math.sqrt((self.df - 2) / self.df)
        if self.cov is None:
            return self.sd * raw
        return raw @ np.linalg.cholesky(self.covariance(d)).T

    def to_dict(self) -> dict:
        data = {"dist": self.dist}
        if self.cov is not None:
            data["cov"] = [list(row) for row in self.cov]
        else:
            data["sd"] = self.sd
        if self.df is not None:
            data["df"] = self.df
        return data

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "Innovation":
        data = data or {}
        cov = data.get("cov")
        return cls(
            dist=data.get("dist", "normal"),
            sd=float(data.get("sd", 1.0)),
            cov=None if cov is None else tuple(tuple(float(v) for v in row) for row in cov),
            df=None if data.get("df") is None else float(data["df"]),
        )


class ProcessSpec:
    """Declarative description of a stationary data-generating process.

    Use the :py:meth:`ar`, :py:meth:`var` and :py:meth:`ma` constructors.

    Args:
        kind: The process family.
        coefficients: ``(p,)`` AR coefficients, ``(P, d, d)`` VAR matrices or ``(J + 1,)`` MA
            coefficients (ignored when ``rule`` is given).
        rule: Name of an MA coefficient rule, see ``MA_RULES``.
        truncation: MA truncation used for population autocovariances.
        sim_truncation: MA truncation used for simulation.
        burn_in: Discarded initial AR/VAR steps, ``max(1000, 50 * order)`` by default.
    """

    def __init__(
        self,
        kind: ProcessKind,
        coefficients=None,
        rule: Optional[str] = None,
        innovation: Optional[Innovation] = None,
        truncation: Optional[int] = None,
        sim_truncation: Optional[int] = None,
        burn_in: Optional[int] = None,
        name: Optional[str] = None,
    ):
        self.kind = ProcessKind(kind)
        self.name = name
        self.rule = rule
        self.innovation = innovation or Innovation()
        if self.kind is ProcessKind.MA_INF:
            self._init_ma(coefficients, rule, truncation, sim_truncation)
        else:
            array = np.array([] if coefficients is None else coefficients, dtype=float)
            if self.kind is ProcessKind.AR:
                array = array.reshape(-1)
            elif array.ndim != 3 or array.shape[1] != array.shape[2] or not array.shape[0]:
                raise ValueError(f"VAR coefficients must be (P, d, d), got shape {array.shape}")
            self.coefficients = array
            self.truncation = None
            self.sim_truncation = None
            radius = self.spectral_radius
            if not radius < 1:
                raise NonStationarySpec(
                    f"companion matrix has spectral radius {radius:.6g} >= 1", radius
                )
        self.innovation.validate(self.dimension)
        if self.kind is ProcessKind.MA_INF:
            # the truncated convolution is exact from the first sample on
            self.burn_in = 0
        elif burn_in is None:
            self.burn_in = max(MIN_BURN_IN, BURN_IN_PER_LAG * self.order)
        else:
            self.burn_in = int(burn_in)

    def _init_ma(self, coefficients, rule, truncation, sim_truncation):
        if rule is not None:
            try:
                ma_rule = MA_RULES[rule]
            except KeyError:
                raise UnknownProcess(rule)
            if truncation is None or sim_truncation is None:
                raise ValueError("an MA rule needs both truncation and sim_truncation")
            self.truncation = int(truncation)
            self.sim_truncation = int(sim_truncation)
            total = float(np.sum(np.abs(ma_rule.coefficients(self.truncation))))
            for j in (self.truncation, self.sim_truncation):
                if ma_rule.tail_bound(j) >= MA_TAIL_RTOL * total:
                    raise ValueError(f"truncation {j} leaves too much of the {rule} tail")
            self.coefficients = ma_rule.coefficients(self.truncation)
        else:
            array = np.array(coefficients, dtype=float).reshape(-1)
            if not array.size:
                raise ValueError("an MA process needs at least one coefficient")
            self.coefficients = array
            self.truncation = self.sim_truncation = len(array) - 1

    @classmethod
    def ar(cls, phi, sd: float = 1.0, name: Optional[str] = None, **kwargs) -> "ProcessSpec":
        return cls(ProcessKind.AR, phi, innovation=Innovation(sd=sd), name=name, **kwargs)

    @classmethod
    def var(cls, phis, cov=None, name: Optional[str] = None, **kwargs) -> "ProcessSpec":
        cov = None if cov is None else tuple(tuple(float(v) for v in row) for row in cov)
        return cls(ProcessKind.VAR, phis, innovation=Innovation(cov=cov), name=name, **kwargs)

    @classmethod
    def ma(cls, coefficients=None, rule: Optional[str] = None, name: Optional[str] = None, **kw):
        return cls(ProcessKind.MA_INF, coefficients, rule=rule, name=name, **kw)

    @property
    def dimension(self) -> int:
        return self.coefficients.shape[1] if self.kind is ProcessKind.VAR else 1

    @property
    def order(self) -> int:
        """AR/VAR order, or the MA simulation truncation."""
        if self.kind is ProcessKind.MA_INF:
            return self.sim_truncation
        return self.coefficients.shape[0]

    @cached_property
    def companion(self) -> np.ndarray:
        """The ``(P d) x (P d)`` companion matrix of an AR or VAR spec."""
        if self.kind is ProcessKind.MA_INF:
            raise ValueError("MA specs have no companion matrix")
        d = self.dimension
        order = self.order
        if order == 0:
            return np.zeros((d, d))
        blocks = self.coefficients.reshape(order, d, d)
        out = np.zeros((order * d, order * d))
        out[:d, :] = np.concatenate(list(blocks), axis=1)
        out[d:, :-d] = np.eye((order - 1) * d)
        return out

    @cached_property
    def spectral_radius(self) -> float:
        if self.kind is ProcessKind.MA_INF:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.companion))))

    def sim_coefficients(self) -> np.ndarray:
        return self.coefficients[: self.sim_truncation + 1]

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind.value,
            "dimension": self.dimension,
            "innovation": self.innovation.to_dict(),
            "burn_in": self.burn_in,
        }
        if self.name is not None:
            data["name"] = self.name
        if self.kind is ProcessKind.MA_INF:
            data["coefficients"] = self.rule if self.rule else self.coefficients.tolist()
            data["truncation"] = self.truncation
            data["sim_truncation"] = self.sim_truncation
        else:
            data["coefficients"] = self.coefficients.tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ProcessSpec":
        kind = ProcessKind(data["kind"])
        coefficients = data.get("coefficients")
        rule = coefficients if isinstance(coefficients, str) else None
        spec = cls(
            kind,
            None if rule else coefficients,
            rule=rule,
            innovation=Innovation.from_dict(data.get("innovation")),
            truncation=data.get("truncation"),
            sim_truncation=data.get("sim_truncation"),
            burn_in=data.get("burn_in"),
            name=data.get("name"),
        )
        if "dimension" in data and int(data["dimension"]) != spec.dimension:
            raise ValueError(f"dimension {data['dimension']} does not match the coefficients")
        return spec

    def __repr__(self) -> str:
        label = self.name or self.kind.value
        return f"{type(self).__name__}({label!r}, order={self.order}, d={self.dimension})"


def simulate(
    spec: ProcessSpec, n: int, seed: int = 0, replicate: int = 0
) -> Union[TimeSeries, MultiSeries]:
    """A sample of length ``n``; deterministic given ``(seed, replicate)``.

    AR and VAR samples are taken after ``spec.burn_in`` steps started at zero, MA samples are
    the exact convolution of the innovations with the truncated coefficients.
    """
    if n < 1:
        raise ValueError(f"sample length must be positive, got {n}")
    rng = replicate_rng(seed, replicate, STREAM_SIM)
    d = spec.dimension
    if spec.kind is ProcessKind.MA_INF:
        theta = spec.sim_coefficients()
        eps = spec.innovation.draw(rng, n + len(theta) - 1, 1)[:, 0]
        return TimeSeries(fftconvolve(eps, theta, mode="valid"))
    total = n + spec.burn_in
    eps = spec.innovation.draw(rng, total, d)
    if spec.kind is ProcessKind.AR:
        x = lfilter([1.0], np.concatenate(([1.0], -spec.coefficients)), eps[:, 0])
        return TimeSeries(x[spec.burn_in :])
    phis = spec.coefficients
    order = phis.shape[0]
    x = np.zeros((total + order, d))
    for t in range(order, total + order):
        x[t] = eps[t - order]
        for i in range(order):
            x[t] += phis[i] @ x[t - 1 - i]
    return MultiSeries(x[order + spec.burn_in :])


def _simulate_chunk(start: int, stop: int, spec: ProcessSpec, n: int, seed: int):
    return [simulate(spec, n, seed, r) for r in range(start, stop)]


def simulate_batch(
    spec: ProcessSpec, n: int, seed: int, replicates: int, workers: int = 1
) -> List[Union[TimeSeries, MultiSeries]]:
    """``replicates`` samples; sample ``r`` equals ``simulate(spec, n, seed, r)``."""
    return map_chunks(_simulate_chunk, replicates, spec, n, seed, workers=workers)


def _ma_autocov(spec: ProcessSpec, max_lag: int) -> AutocovVector:
    theta = spec.coefficients
    sd = spec.innovation.sd
    gamma = [
        sd**2 * float(np.dot(theta[: len(theta) - h], theta[h:])) if h < len(theta) else 0.0
        for h in range(max_lag + 1)
    ]
    return AutocovVector(gamma)


def _ar_autocov(spec: ProcessSpec, max_lag: int) -> AutocovVector:
    phi = spec.coefficients
    p = len(phi)
    sigma2 = spec.innovation.sd**2
    # gamma_h - sum_i phi_i gamma_{|h-i|} = sigma2 * [h == 0], h = 0..p
    system = np.eye(p + 1)
    for h in range(p + 1):
        for i in range(1, p + 1):
            system[h, abs(h - i)] -= phi[i - 1]
    rhs = np.zeros(p + 1)
    rhs[0] = sigma2
    gamma = list(np.linalg.solve(system, rhs))
    for h in range(p + 1, max_lag + 1):
        gamma.append(sum(phi[i - 1] * gamma[h - i] for i in range(1, p + 1)))
    return AutocovVector(gamma[: max_lag + 1])


def stationary_covariance(spec: ProcessSpec) -> np.ndarray:
    """Covariance ``C`` of the stacked state ``(X_t, ..., X_{t-P+1})``, the solution of the
    discrete Lyapunov equation ``C = A C A^T + Sigma``."""
    a = spec.companion
    size = a.shape[0]
    d = spec.dimension
    sigma = np.zeros((size, size))
    sigma[:d, :d] = spec.innovation.covariance(d)
    c = solve_discrete_lyapunov(a, sigma)
    c = (c + c.T) / 2
    residual = float(np.max(np.abs(a @ c @ a.T + sigma - c)))
    if residual > LYAPUNOV_TOL * max(1.0, float(np.max(np.abs(c)))):
        raise NonStationarySpec(
            f"stationary covariance equation residual {residual:.3g} is too large",
            spec.spectral_radius,
        )
    return c


def _var_autocov(spec: ProcessSpec, max_lag: int) -> BlockAutocov:
    d = spec.dimension
    state = stationary_covariance(spec)
    a = spec.companion
    gammas = []
    for _ in range(max_lag + 1):
        # state = E(Z_{t+h} Z_t^T), its leading block is E(X_{t+h} X_t^T) = Gamma_h^T
        gammas.append(state[:d, :d].T)
        state = a @ state
    gammas[0] = (gammas[0] + gammas[0].T) / 2
    return BlockAutocov(np.stack(gammas))


class PopulationTruth:
    """Exact autocovariances of a spec up to ``max_lag`` and the measures derived from them."""

    def __init__(self, spec: ProcessSpec, autocov: Union[AutocovVector, BlockAutocov]):
        self.spec = spec
        self.autocov = autocov
        self.stats = population_stats(autocov)

    @property
    def max_lag(self) -> int:
        return self.autocov.p

    @property
    def is_multivariate(self) -> bool:
        return isinstance(self.autocov, BlockAutocov)

    @property
    def m(self) -> np.ndarray:
        return self.stats.m

    @property
    def s(self) -> np.ndarray:
        return self.stats.s

    @property
    def q(self) -> np.ndarray:
        return self.stats.q

    @property
    def kappa(self) -> np.ndarray:
        if self.is_multivariate:
            raise AttributeError("partial autocorrelations are univariate")
        return self.stats.kappa

    def to_dict(self) -> dict:
        data = {
            "spec": self.spec.to_dict(),
            "max_lag": self.max_lag,
            "m": self.m.tolist(),
            "s": self.s.tolist(),
            "q": self.q.tolist(),
        }
        if self.is_multivariate:
            data["gammas"] = self.autocov.gammas.tolist()
        else:
            data["gamma"] = self.autocov.gamma.tolist()
            data["kappa"] = self.kappa.tolist()
        return data

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec!r}, max_lag={self.max_lag})"


def true_autocov(
    spec: ProcessSpec, max_lag: int, logger: Optional[logging.Logger] = None
) -> PopulationTruth:
    """Population autocovariances up to ``max_lag`` and the derived measures."""
    if max_lag < 0:
        raise ValueError(f"max_lag must be non-negative, got {max_lag}")
    logger = create_logger("true_autocov", logger)
    logger.debug("population autocovariances of %r up to lag %d", spec, max_lag)
    if spec.kind is ProcessKind.MA_INF:
        autocov = _ma_autocov(spec, max_lag)
    elif spec.kind is ProcessKind.AR:
        autocov = _ar_autocov(spec, max_lag)
    else:
        autocov = _var_autocov(spec, max_lag)
    return PopulationTruth(spec, autocov)


PHI1_VAR3 = 0.16 * np.array(
    [
        [7, 2, 1, 0, 0],
        [2, 5, 2, 1, 0],
        [1, 2, 5, 2, 1],
        [0, 1, 2, 5, 2],
        [0, 0, 1, 2, 5],
    ]
)
PHI2_VAR3 = -0.1 * np.array(
    [
        [3, 2, 0, 0, 0],
        [2, 3, 2, 0, 0],
        [0, 2, 3, 2, 0],
        [0, 0, 2, 3, 2],
        [0, 0, 0, 2, 3],
    ]
)
PHI3_VAR3 = -0.05 * np.array(
    [
        [2, 1, 0, 0, 0],
        [1, 1, 1, 0, 0],
        [0, 1, 1, 1, 0],
        [0, 0, 1, 1, 1],
        [0, 0, 0, 1, 1],
    ]
)


def builtin_specs() -> Dict[str, ProcessSpec]:
    """The catalog of named processes used by the reproduction experiments."""
    return dict(_catalog())


@functools.lru_cache(maxsize=None)
def _catalog() -> Dict[str, ProcessSpec]:
    return {
        "ma-poly": ProcessSpec.ma(
            rule="poly4", truncation=10**6, sim_truncation=10**4, name="ma-poly"
        ),
        "ma-geom": ProcessSpec.ma(
            rule="geom085", truncation=1000, sim_truncation=500, name="ma-geom"
        ),
        "ar5": ProcessSpec.ar([-0.25, 0.1, 0.4, -0.25, 0.25], name="ar5"),
        "ar2": ProcessSpec.ar([-0.2, -0.3], name="ar2"),
        "ar4": ProcessSpec.ar([-0.2, -0.3, 0.3, 0.2], name="ar4"),
        "ar6": ProcessSpec.ar([-0.2, -0.3, 0.3, 0.2, 0.1, 0.1], name="ar6"),
        "var3": ProcessSpec.var([PHI1_VAR3, PHI2_VAR3, PHI3_VAR3], name="var3"),
        # Theta_j = (0.6 Phi_1)^j is the VAR(1) with coefficient 0.6 Phi_1
        "vma": ProcessSpec.var([0.6 * PHI1_VAR3], name="vma"),
        "white-noise": ProcessSpec.ar([], name="white-noise"),
    }


SPEC_ALIASES: Dict[str, str] = {
    "ar5-kue13": "ar5",
    "ar2-sec43": "ar2",
    "ar4-sec43": "ar4",
    "ar6-sec43": "ar6",
    "var3-sec5": "var3",
    "vma-sec5": "vma",
}


def load_spec(name_or_path: Union[str, Path]) -> ProcessSpec:
    """A catalog spec by name or alias (:py:data:`SPEC_ALIASES`), or a spec from a JSON file."""
    catalog = builtin_specs()
    key = SPEC_ALIASES.get(str(name_or_path), str(name_or_path))
    if key in catalog:
        return catalog[key]
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        return ProcessSpec.from_dict(json.loads(path.read_text(encoding="utf-8")))
    raise UnknownProcess(str(name_or_path))
