"""Distribution of the estimated order over simulated samples."""

from collections import Counter
from typing import Any
from typing import Dict
from typing import List

from pivotfpe import inference
from pivotfpe.config import default_p_max
from pivotfpe.inference import Measure
from pivotfpe.pivot import WQuantileTable
from pivotfpe.processes import ProcessSpec
from pivotfpe.processes import simulate
from pivotfpe.processes import true_autocov
from pivotfpe.utils import derive_seed

from .base import Experiment
from .base import run_replicates

NOT_FOUND = "none"


def estimated_order(
    spec: ProcessSpec,
    n: int,
    seed: int,
    replicate: int,
    measure: str,
    nu: float,
    alpha: float,
    table: WQuantileTable,
):
    """The order estimate of one simulated sample, ``NOT_FOUND`` when no order qualified."""
    order = inference.estimate_order(simulate(spec, n, seed, replicate), measure, nu, alpha, table)
    return NOT_FOUND if order.p_hat is None else order.p_hat


def true_order(spec: ProcessSpec, nu: float, p_max: int):
    """The smallest ``p`` with ``S_p < 1 - nu``, or ``None`` up to ``p_max``."""
    s = true_autocov(spec, p_max).s
    for p in range(1, p_max + 1):
        if s[p] < 1 - nu:
            return p
    return None


class OrderHistogram(Experiment):
    """Histogram of the order estimate for the AR(5) process."""

    name = "order"
    spec_names = ("ar5",)
    measure = Measure.S
    nu = 0.6
    alpha = 0.1
    columns = {
        "spec": "catalog name of the simulated process",
        "n": "sample size N",
        "nu": "required share of explained variance",
        "alpha": "level of the order estimator",
        "p_max": "largest order searched",
        "p_star": "smallest order whose population S_p is below 1 - nu",
        "p_hat": "estimated order, 'none' when no order up to p_max qualified",
        "count": "replicates with this estimate",
        "frequency": "share of valid replicates with this estimate",
        "failures": "replicates with a singular path or a vanishing normalizer",
        "table_digest": "SHA-256 of the W quantile table",
    }

    def parameters(self) -> Dict[str, Any]:
        return {
            "measure": self.measure.value,
            "nu": self.nu,
            "alpha": self.alpha,
            "p_max": {str(n): default_p_max(n) for n in self.sample_sizes},
        }

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for index, name in enumerate(self.spec_names):
            spec = self.spec(name)
            for n in self.sample_sizes:
                p_max = default_p_max(n)
                p_star = true_order(spec, self.nu, p_max)
                logger = self.child_logger(f"{name}[n={n}]")
                logger.info("estimating the order of %d replicates", self.replicates)
                estimates = run_replicates(
                    self.name,
                    estimated_order,
                    spec,
                    n,
                    derive_seed(self.seed, index, n),
                    self.replicates,
                    self.measure.value,
                    self.nu,
                    self.alpha,
                    self.table,
                    workers=self.workers,
                )
                counts = Counter(e for e in estimates if e is not None)
                valid = sum(counts.values())
                failures = self.replicates - valid
                if failures:
                    logger.warning("%d replicates without a statistic", failures)
                for p_hat in list(range(1, p_max + 1)) + [NOT_FOUND]:
                    rows.append(
                        {
                            "spec": name,
                            "n": n,
                            "nu": self.nu,
                            "alpha": self.alpha,
                            "p_max": p_max,
                            "p_star": p_star,
                            "p_hat": p_hat,
                            "count": counts[p_hat],
                            "frequency": counts[p_hat] / valid if valid else None,
                            "failures": failures,
                            "table_digest": self.table_digest,
                        }
                    )
        return rows
