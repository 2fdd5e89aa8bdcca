"""Scripted reproduction runs, addressable by name."""

from typing import Dict
from typing import Type

from pivotfpe.exceptions import UnknownExperiment

from .base import DEFAULT_EXPERIMENT_REPLICATES
from .base import DEFAULT_SAMPLE_SIZES
from .base import Experiment
from .base import RunManifest
from .base import table_provenance
from .base import write_csv
from .coverage import KappaCoverage
from .order import OrderHistogram
from .rejection import MultivariateRejection
from .rejection import UnivariateRejection
from .truth import PopulationTable

EXPERIMENTS: Dict[str, Type[Experiment]] = {
    cls.name: cls
    for cls in (
        UnivariateRejection,
        PopulationTable,
        OrderHistogram,
        KappaCoverage,
        MultivariateRejection,
    )
}


EXPERIMENT_ALIASES: Dict[str, str] = {
    "fig1": UnivariateRejection.name,
    "table1": PopulationTable.name,
    "fig2": OrderHistogram.name,
    "table2-piv": KappaCoverage.name,
    "fig3": MultivariateRejection.name,
}


def get_experiment(name: str) -> Type[Experiment]:
    try:
        return EXPERIMENTS[EXPERIMENT_ALIASES.get(name, name)]
    except KeyError:
        raise UnknownExperiment(name)


__all__ = [
    "DEFAULT_EXPERIMENT_REPLICATES",
    "DEFAULT_SAMPLE_SIZES",
    "EXPERIMENT_ALIASES",
    "EXPERIMENTS",
    "Experiment",
    "get_experiment",
    "KappaCoverage",
    "MultivariateRejection",
    "OrderHistogram",
    "PopulationTable",
    "RunManifest",
    "table_provenance",
    "UnivariateRejection",
    "write_csv",
]
