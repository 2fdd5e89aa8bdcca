"""Population values of the prediction measures; no simulation involved."""

from typing import Any
from typing import Dict
from typing import List

from pivotfpe.processes import true_autocov

from .base import Experiment


class PopulationTable(Experiment):
    """``M_p``, ``S_p``, ``Q_p`` and ``kappa_p`` of the AR(5) process for ``p = 1..7``."""

    name = "population"
    needs_table = False
    spec_names = ("ar5",)
    max_order = 7
    columns = {
        "spec": "catalog name of the process",
        "p": "order",
        "m": "final prediction error M_p",
        "s": "relative prediction error S_p = M_p / M_0",
        "q": "relative improvement Q_p = M_p / M_(p-1)",
        "kappa": "partial autocorrelation kappa_p",
    }

    def parameters(self) -> Dict[str, Any]:
        return {"max_order": self.max_order}

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for name in self.spec_names:
            truth = true_autocov(self.spec(name), self.max_order)
            for p in range(1, self.max_order + 1):
                rows.append(
                    {
                        "spec": name,
                        "p": p,
                        "m": float(truth.m[p]),
                        "s": float(truth.s[p]),
                        "q": float(truth.q[p - 1]),
                        "kappa": float(truth.kappa[p - 1]),
                    }
                )
        return rows
