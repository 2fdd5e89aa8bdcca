"""Empirical rejection rates of the threshold test as a function of the threshold ``delta``."""

from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np

from pivotfpe import inference
from pivotfpe.config import DEFAULT_GRID_POINTS
from pivotfpe.exceptions import DegenerateNormalizer
from pivotfpe.exceptions import PathSingular
from pivotfpe.inference import Measure
from pivotfpe.pivot import WQuantileTable
from pivotfpe.processes import ProcessSpec
from pivotfpe.processes import simulate
from pivotfpe.processes import true_autocov
from pivotfpe.utils import derive_seed

from .base import Experiment
from .base import run_replicates


def lower_bounds(
    spec: ProcessSpec,
    n: int,
    seed: int,
    replicate: int,
    measure: str,
    orders: Sequence[int],
    alpha: float,
    table: WQuantileTable,
) -> List[Optional[float]]:
    """``estimate - q_alpha V`` of one simulated sample for every order; ``None`` where the
    statistic is undefined. The test rejects at ``delta`` exactly when this is ``<= delta``."""
    x = simulate(spec, n, seed, replicate)
    estimator = inference.estimator_for(x, Measure(measure))
    bounds = []
    for p in orders:
        try:
            est = inference.estimate_measure(estimator, measure, p)
            bounds.append(inference.lower_bound(est, alpha, table))
        except (PathSingular, DegenerateNormalizer):
            bounds.append(None)
    return bounds


def delta_grid(center: float, offsets: Sequence[float]) -> List[float]:
    """``center + offset`` for every offset, restricted to thresholds in ``(0, 1)``."""
    return [center + offset for offset in offsets if 0 < center + offset < 1]


class RejectionCurves(Experiment):
    """Rejection rate of ``H0: measure_p > delta`` per spec, ``N``, ``p`` and ``delta``, with
    the ``delta`` grid centered at the true value of the measure."""

    measure: Measure = Measure.S
    orders: Sequence[int] = ()
    alpha: float = 0.05
    offsets: Sequence[float] = ()
    columns = {
        "spec": "catalog name of the simulated process",
        "n": "sample size N",
        "p": "order of the tested measure",
        "alpha": "level of the test",
        "offset": "delta minus the true value",
        "delta": "threshold of the null hypothesis measure > delta",
        "true_value": "population value of the measure",
        "rejection_rate": "share of valid replicates rejecting the null",
        "valid": "replicates with a defined statistic",
        "failures": "replicates with a singular path or a vanishing normalizer",
        "table_digest": "SHA-256 of the W quantile table",
    }

    def true_values(self, spec: ProcessSpec) -> Dict[int, float]:
        truth = true_autocov(spec, max(self.orders))
        return {p: float(truth.s[p]) for p in self.orders}

    def parameters(self) -> Dict[str, Any]:
        grids = {}
        for name in self.spec_names:
            truth = self.true_values(self.spec(name))
            grids[name] = {str(p): delta_grid(truth[p], self.offsets) for p in self.orders}
        return {
            "measure": self.measure.value,
            "orders": list(self.orders),
            "alpha": self.alpha,
            "offsets": list(self.offsets),
            "delta_grids": grids,
            "grid_points": DEFAULT_GRID_POINTS,
        }

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for index, name in enumerate(self.spec_names):
            spec = self.spec(name)
            truth = self.true_values(spec)
            for n in self.sample_sizes:
                logger = self.child_logger(f"{name}[n={n}]")
                logger.info("simulating %d replicates", self.replicates)
                bounds = run_replicates(
                    self.name,
                    lower_bounds,
                    spec,
                    n,
                    derive_seed(self.seed, index, n),
                    self.replicates,
                    self.measure.value,
                    tuple(self.orders),
                    self.alpha,
                    self.table,
                    workers=self.workers,
                )
                for k, p in enumerate(self.orders):
                    values = np.array(
                        [b[k] for b in bounds if b is not None and b[k] is not None], dtype=float
                    )
                    failures = self.replicates - len(values)
                    if failures:
                        logger.warning("order %d: %d replicates without a statistic", p, failures)
                    for offset in self.offsets:
                        delta = truth[p] + offset
                        if not 0 < delta < 1:
                            continue
                        rate = float(np.mean(values <= delta)) if len(values) else None
                        rows.append(
                            {
                                "spec": name,
                                "n": n,
                                "p": p,
                                "alpha": self.alpha,
                                "offset": offset,
                                "delta": delta,
                                "true_value": truth[p],
                                "rejection_rate": rate,
                                "valid": len(values),
                                "failures": failures,
                                "table_digest": self.table_digest,
                            }
                        )
        return rows


class UnivariateRejection(RejectionCurves):
    """Rejection curves of the relative prediction error ``S_p`` for the polynomially and
    geometrically decaying MA processes."""

    name = "rejection"
    spec_names = ("ma-poly", "ma-geom")
    measure = Measure.S
    orders = (2, 4, 6)
    alpha = 0.05
    offsets = tuple(round(-0.20 + 0.05 * k, 10) for k in range(9))


class MultivariateRejection(RejectionCurves):
    """Rejection curves of the multivariate relative prediction error for the VAR(3) and the
    geometric VMA processes."""

    name = "mv-rejection"
    spec_names = ("var3", "vma")
    measure = Measure.MV_S
    orders = (1,)
    alpha = 0.1
    offsets = tuple(round(-0.10 + 0.025 * k, 10) for k in range(9))
