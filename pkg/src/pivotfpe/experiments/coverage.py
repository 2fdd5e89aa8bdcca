"""Coverage and length of the pivotal confidence intervals for partial autocorrelations."""

from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from pivotfpe import inference
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


def kappa_intervals(
    spec: ProcessSpec,
    n: int,
    seed: int,
    replicate: int,
    orders: Sequence[int],
    alpha: float,
    table: WQuantileTable,
) -> List[Optional[Tuple[float, float]]]:
    """``(lower, upper)`` of the ``1 - alpha`` interval of ``kappa_p`` for every order."""
    estimator = inference.estimator_for(simulate(spec, n, seed, replicate), Measure.KAPPA)
    out = []
    for p in orders:
        try:
            interval = inference.ci(estimator, Measure.KAPPA, p, alpha, table)
            out.append((interval.lower, interval.upper))
        except (PathSingular, DegenerateNormalizer):
            out.append(None)
    return out


class KappaCoverage(Experiment):
    """Empirical coverage and mean length of the level-0.9 intervals of ``kappa_p``.

    Scenario ``i`` pairs each order with the AR process of that order, scenario ``ii`` uses the
    AR(6) process for every order.
    """

    name = "kappa-coverage"
    spec_names = ("ar2", "ar4", "ar6")
    scenarios: Tuple[Tuple[str, str, Tuple[int, ...]], ...] = (
        ("i", "ar2", (2,)),
        ("i", "ar4", (4,)),
        ("ii", "ar6", (2, 4)),
    )
    alpha = 0.1
    columns = {
        "scenario": "scenario of the coverage study",
        "spec": "catalog name of the simulated process",
        "n": "sample size N",
        "p": "lag of the partial autocorrelation",
        "level": "nominal coverage",
        "true_kappa": "population partial autocorrelation",
        "coverage": "share of valid replicates whose interval contains the true value",
        "mean_length": "mean interval length over valid replicates",
        "valid": "replicates with a defined interval",
        "failures": "replicates with a singular path or a vanishing normalizer",
        "table_digest": "SHA-256 of the W quantile table",
    }

    def parameters(self) -> Dict[str, Any]:
        return {
            "measure": Measure.KAPPA.value,
            "level": 1 - self.alpha,
            "scenarios": [
                {"scenario": scenario, "spec": name, "orders": list(orders)}
                for scenario, name, orders in self.scenarios
            ],
        }

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for scenario, name, orders in self.scenarios:
            spec = self.spec(name)
            kappa = true_autocov(spec, max(orders)).kappa
            index = self.spec_names.index(name)
            for n in self.sample_sizes:
                logger = self.child_logger(f"{name}[n={n}]")
                logger.info("computing %d replicate intervals", self.replicates)
                intervals = run_replicates(
                    self.name,
                    kappa_intervals,
                    spec,
                    n,
                    derive_seed(self.seed, index, n),
                    self.replicates,
                    tuple(orders),
                    self.alpha,
                    self.table,
                    workers=self.workers,
                )
                for k, p in enumerate(orders):
                    bounds = np.array(
                        [i[k] for i in intervals if i is not None and i[k] is not None],
                        dtype=float,
                    ).reshape(-1, 2)
                    target = float(kappa[p - 1])
                    covered = (bounds[:, 0] <= target) & (target <= bounds[:, 1])
                    valid = len(bounds)
                    rows.append(
                        {
                            "scenario": scenario,
                            "spec": name,
                            "n": n,
                            "p": p,
                            "level": 1 - self.alpha,
                            "true_kappa": target,
                            "coverage": float(np.mean(covered)) if valid else None,
                            "mean_length": (
                                float(np.mean(bounds[:, 1] - bounds[:, 0])) if valid else None
                            ),
                            "valid": valid,
                            "failures": self.replicates - valid,
                            "table_digest": self.table_digest,
                        }
                    )
        return rows
