"""Shared machinery of the reproduction experiments: run manifests, CSV output and the
replicate fan-out."""

import csv
import logging
import sys
import time
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import Iterable
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Sequence
from typing import Tuple

from pivotfpe.exceptions import DegenerateNormalizer
from pivotfpe.exceptions import ExperimentFailed
from pivotfpe.exceptions import PathSingular
from pivotfpe.log import create_child_logger
from pivotfpe.log import create_logger
from pivotfpe.log import logged
from pivotfpe.pivot import WQuantileTable
from pivotfpe.processes import load_spec
from pivotfpe.processes import ProcessSpec
from pivotfpe.utils import dumps_17g
from pivotfpe.utils import format_real
from pivotfpe.utils import map_chunks
from pivotfpe.utils import sha256_file

DEFAULT_SAMPLE_SIZES = (100, 200, 500, 1000)
DEFAULT_EXPERIMENT_REPLICATES = 1000
MANIFEST_NAME = "manifest.json"

#: Replicate failures that are outcomes of the statistic rather than operational errors
STATISTICAL_FAILURES = (PathSingular, DegenerateNormalizer)


class RunManifest(NamedTuple):
    """Everything needed to trace and rerun one reproduction run."""

    experiment: str
    command: Tuple[str, ...]
    seed: int
    replicates: int
    sample_sizes: Tuple[int, ...]
    table: Optional[dict]
    specs: Dict[str, dict]
    parameters: Dict[str, Any]
    columns: Dict[str, str]
    outputs: Dict[str, str]
    wall_clock_seconds: float

    def to_dict(self) -> dict:
        data = self._asdict()
        data["command"] = list(self.command)
        data["sample_sizes"] = list(self.sample_sizes)
        if self.table is None:
            del data["table"]
        return data

    def store(self, path) -> Path:
        path = Path(path)
        path.write_text(dumps_17g(self.to_dict()), encoding="utf-8")
        return path


def table_provenance(table: WQuantileTable, built: bool = False, path=None) -> dict:
    data = {
        "digest": table.digest,
        "alphas": list(table.alphas),
        "replicates": table.replicates,
        "bm_steps": table.bm_steps,
        "seed": table.seed,
        "schema_version": table.schema_version,
        "built_for_this_run": built,
    }
    if path is not None:
        data["path"] = str(path)
    return data


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_real(value)
    return str(value)


def write_csv(path, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    """UTF-8, comma separated, a header row and ``\\n`` line endings; floats with 17 digits."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_cell(row.get(key)) for key in columns})
    return path


def run_replicates(
    experiment: str,
    func: Callable[..., Any],
    spec: ProcessSpec,
    n: int,
    seed: int,
    replicates: int,
    *args: Any,
    workers: int = 1,
) -> List[Any]:
    """``func(spec, n, seed, replicate, *args)`` for every replicate, fanned out over
    ``workers`` processes.

    A replicate whose statistic is undefined (a singular sequential path or a vanishing
    normalizer) yields ``None``; any other error aborts the run as
    :py:class:`pivotfpe.exceptions.ExperimentFailed` naming the spec, ``n`` and the replicate.
    """
    return map_chunks(
        _replicate_chunk, replicates, experiment, func, spec, n, seed, args, workers=workers
    )


def _replicate_chunk(start, stop, experiment, func, spec, n, seed, args):
    results = []
    for r in range(start, stop):
        try:
            results.append(func(spec, n, seed, r, *args))
        except STATISTICAL_FAILURES:
            results.append(None)
        except Exception as e:
            configuration = {"spec": spec.name, "n": n, "seed": seed, "replicate": r}
            raise ExperimentFailed(experiment, configuration, f"{type(e).__name__}: {e}")
    return results


class Experiment:
    """A scripted reproduction run that writes ``<name>.csv`` and ``manifest.json``.

    Subclasses set ``name``, ``columns`` (column name to description) and ``spec_names`` and
    implement :py:meth:`rows`.

    Args:
        replicates: Monte Carlo replicates per configuration.
        sample_sizes: Sample sizes ``N``.
        seed: Root seed; every configuration derives its own seed from it.
        workers: Worker processes; outputs do not depend on it.
        table: Quantile table of ``W``, required by every experiment with ``needs_table``.
        table_info: Provenance of the table for the manifest.
    """

    name = None
    needs_table = True
    spec_names: Tuple[str, ...] = ()
    columns: Dict[str, str] = {}

    def __init__(
        self,
        replicates: int = DEFAULT_EXPERIMENT_REPLICATES,
        sample_sizes: Sequence[int] = DEFAULT_SAMPLE_SIZES,
        seed: int = 0,
        workers: int = 1,
        table: Optional[WQuantileTable] = None,
        table_info: Optional[dict] = None,
        logger: Optional[logging.Logger] = None,
    ):
        if replicates < 1:
            raise ValueError(f"replicates must be positive, got {replicates}")
        if not sample_sizes or min(sample_sizes) < 2:
            raise ValueError(f"sample sizes must be at least 2, got {sample_sizes!r}")
        if self.needs_table and table is None:
            raise ValueError(f"experiment {self.name} needs a quantile table of W")
        self.replicates = int(replicates)
        self.sample_sizes = tuple(int(n) for n in sample_sizes)
        self.seed = int(seed)
        self.workers = max(1, int(workers))
        self.table = table
        self.table_info = table_info
        self.table_digest = table.digest if table is not None else ""
        self.logger = create_logger(type(self).__name__, logger)

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(replicates={self.replicates}, "
            f"sample_sizes={self.sample_sizes!r}, seed={self.seed})"
        )

    def spec(self, name: str) -> ProcessSpec:
        return load_spec(name)

    def parameters(self) -> Dict[str, Any]:
        """Experiment-specific settings recorded in the manifest."""
        return {}

    def rows(self) -> List[Dict[str, Any]]:
        raise NotImplementedError

    def child_logger(self, name: str) -> logging.Logger:
        return create_child_logger(self.logger, name)

    @logged()
    def run(self, out_dir, command: Optional[Sequence[str]] = None) -> RunManifest:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        start = time.time()
        rows = self.rows()
        csv_path = write_csv(out_dir / f"{self.name}.csv", tuple(self.columns), rows)
        table = None
        if self.table is not None:
            table = self.table_info or table_provenance(self.table)
        manifest = RunManifest(
            experiment=self.name,
            command=tuple(sys.argv if command is None else command),
            seed=self.seed,
            replicates=self.replicates,
            sample_sizes=self.sample_sizes,
            table=table,
            specs={name: self.spec(name).to_dict() for name in self.spec_names},
            parameters=self.parameters(),
            columns=dict(self.columns),
            outputs={csv_path.name: sha256_file(csv_path)},
            wall_clock_seconds=round(time.time() - start, 3),
        )
        manifest.store(out_dir / MANIFEST_NAME)
        self.logger.info("wrote %d rows to %s", len(rows), csv_path)
        return manifest
