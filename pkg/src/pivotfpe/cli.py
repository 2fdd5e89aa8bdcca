"""Command line interface.

.. code-block:: text

    pivotfpe w-table    [--alphas A ...] [--replicates R] [--bm-steps K] [--seed S] [--out PATH]
    pivotfpe simulate   --spec NAME|FILE --n N [--seed S] [--replicate R] --out PATH
    pivotfpe infer      --input CSV --measure M --mode MODE [--p P] [--alpha A] ...
    pivotfpe truth      --spec NAME|FILE [--max-lag L]
    pivotfpe reproduce  EXPERIMENT [--replicates R] [--n N ...] [--seed S] [--out-dir DIR]

Results are printed as JSON on standard output. A statistical decision never changes the exit
status: 0 is success, 2 a usage error, 3 a failed operation and 4 an unreadable input file, the
last two with ``{"error": ..., "message": ...}`` on standard output.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

from . import inference
from .config import DEFAULT_ALPHAS
from .config import DEFAULT_BM_STEPS
from .config import DEFAULT_GRID_POINTS
from .config import DEFAULT_REPLICATES
from .config import DEFAULT_TABLE_SEED
from .config import default_table_path
from .config import default_workers
from .exceptions import PivotFPEException
from .exceptions import SeriesParseError
from .experiments import DEFAULT_EXPERIMENT_REPLICATES
from .experiments import DEFAULT_SAMPLE_SIZES
from .experiments import EXPERIMENT_ALIASES
from .experiments import EXPERIMENTS
from .experiments import get_experiment
from .experiments import table_provenance
from .inference import Measure
from .pivot import build_table
from .pivot import ensure_table
from .pivot import WQuantileTable
from .processes import load_spec
from .processes import simulate
from .processes import true_autocov
from .series import LambdaGrid
from .series import read_series_csv
from .series import write_series_csv
from .utils import dumps_17g
from .utils import sha256_file

EXIT_OK = 0
EXIT_FAILED = 3
EXIT_PARSE = 4

MODES = ("ci", "test", "delta-hat", "order", "pstar-leq", "pstar-gt")

logger = logging.getLogger("pivotfpe")


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _emit(data: Dict[str, Any]) -> None:
    sys.stdout.write(dumps_17g(data))


def _load_table(path: Optional[str], alphas: Sequence[float], workers: int):
    """The table at ``path`` (or the default location); built only when no file exists."""
    path = Path(path) if path else default_table_path()
    if path.exists():
        table = WQuantileTable.load(path)
        return table, table_provenance(table, built=False, path=path)
    table, built = ensure_table(path, alphas=alphas, workers=workers, logger=logger)
    return table, table_provenance(table, built=built, path=path)


def cmd_w_table(args: argparse.Namespace) -> int:
    table = build_table(
        alphas=args.alphas,
        replicates=args.replicates,
        bm_steps=args.bm_steps,
        seed=args.seed,
        workers=args.workers,
        logger=logger,
    )
    path = table.store(Path(args.out) if args.out else default_table_path())
    _emit({"path": str(path), "digest": table.digest, "table": table.to_dict()})
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    series = simulate(spec, args.n, args.seed, args.replicate)
    path = write_series_csv(series, args.out)
    _emit(
        {
            "path": str(path),
            "sha256": sha256_file(path),
            "spec": spec.to_dict(),
            "n": args.n,
            "seed": args.seed,
            "replicate": args.replicate,
        }
    )
    return EXIT_OK


def _needed_alphas(mode: str, alpha: float) -> List[float]:
    return [1 - alpha / 2] if mode == "ci" else [alpha]


def _check_infer_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    required = {
        "ci": ("p",),
        "test": ("p", "delta"),
        "delta-hat": ("p",),
        "order": ("nu",),
        "pstar-leq": ("p0", "nu"),
        "pstar-gt": ("p0", "nu"),
    }[args.mode]
    missing = [f"--{name.replace('_', '-')}" for name in required if getattr(args, name) is None]
    if missing:
        parser.error(f"mode {args.mode} requires {', '.join(missing)}")


def _outcome(outcome: inference.TestOutcome) -> Dict[str, Any]:
    return {
        "reject": outcome.reject,
        "statistic": _finite(outcome.statistic),
        "threshold": outcome.threshold,
        "alpha": outcome.alpha,
    }


def _order(order: inference.OrderEstimate) -> Dict[str, Any]:
    return {
        "p_hat": order.p_hat,
        "p_max": order.p_max,
        "nu": order.nu,
        "alpha": order.alpha,
        "steps": [step._asdict() for step in order.steps],
    }


def cmd_infer(args: argparse.Namespace) -> int:
    series = read_series_csv(args.input)
    table, table_info = _load_table(args.table, _needed_alphas(args.mode, args.alpha), args.workers)
    measure = Measure(args.measure)
    grid = LambdaGrid.uniform(args.grid_points)
    options = {"grid": grid, "centered": args.centered}
    result: Dict[str, Any] = {"mode": args.mode, "measure": measure.value}
    if args.mode in ("ci", "test", "delta-hat"):
        est = inference.estimate_measure(series, measure, args.p, **options)
        result.update(p=args.p, estimate=est.estimate, normalizer=est.normalizer.positive())
        if args.mode == "ci":
            ci = inference.interval(est, args.alpha, table)
            result.update(
                critical=ci.critical,
                interval={"lower": ci.lower, "upper": ci.upper, "level": ci.level},
            )
        elif args.mode == "test":
            outcome = inference.threshold_decision(est, args.delta, args.alpha, table)
            result.update(critical=outcome.critical, decision=_outcome(outcome))
        else:
            result.update(
                critical=table.quantile(args.alpha),
                alpha=args.alpha,
                delta_hat=max(0.0, inference.lower_bound(est, args.alpha, table)),
            )
    elif args.mode == "order":
        order = inference.estimate_order(
            series, measure, args.nu, args.alpha, table, args.p_max, logger=logger, **options
        )
        result.update(critical=order.critical, order=_order(order))
    else:
        if args.mode == "pstar-leq":
            outcome = inference.test_pstar_leq(
                series, measure, args.p0, args.nu, args.alpha, table, args.p_max, **options
            )
        else:
            outcome = inference.test_pstar_gt(
                series, measure, args.p0, args.nu, args.alpha, table, **options
            )
        result.update(
            p=args.p0,
            estimate=outcome.estimate,
            normalizer=outcome.normalizer,
            critical=outcome.critical,
            decision=_outcome(outcome),
        )
        if outcome.order is not None:
            result["order"] = _order(outcome.order)
    result["manifest"] = {
        "command": args.argv,
        "input": str(args.input),
        "input_sha256": sha256_file(args.input),
        "n": series.n,
        "grid_points": args.grid_points,
        "centered": args.centered,
        "table": table_info,
    }
    _emit(result)
    return EXIT_OK


def cmd_truth(args: argparse.Namespace) -> int:
    _emit(true_autocov(load_spec(args.spec), args.max_lag, logger=logger).to_dict())
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    cls = get_experiment(args.experiment)
    table = table_info = None
    if cls.needs_table:
        table, table_info = _load_table(args.table, DEFAULT_ALPHAS, args.workers)
    experiment = cls(
        replicates=args.replicates,
        sample_sizes=args.n,
        seed=args.seed,
        workers=args.workers,
        table=table,
        table_info=table_info,
        logger=logger,
    )
    manifest = experiment.run(args.out_dir, command=args.argv)
    _emit({"out_dir": str(args.out_dir), "manifest": manifest.to_dict()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pivotfpe",
        description="Pivotal inference for final prediction errors of stationary time series.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    commands = parser.add_subparsers(dest="command", required=True)

    w_table = commands.add_parser("w-table", help="simulate and store quantiles of W")
    w_table.add_argument("--alphas", type=float, nargs="+", default=list(DEFAULT_ALPHAS))
    w_table.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    w_table.add_argument("--bm-steps", type=int, default=DEFAULT_BM_STEPS)
    w_table.add_argument("--seed", type=int, default=DEFAULT_TABLE_SEED)
    w_table.add_argument("--workers", type=int, default=default_workers())
    w_table.add_argument("--out", help="table path, $PIVOTFPE_TABLE or the user cache by default")
    w_table.set_defaults(func=cmd_w_table)

    sim = commands.add_parser("simulate", help="simulate a catalog or JSON process spec")
    sim.add_argument("--spec", required=True, help="catalog name or JSON spec file")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--replicate", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    infer = commands.add_parser("infer", help="confidence intervals, tests and order estimates")
    infer.add_argument("--input", required=True, help="CSV file, one column per channel")
    infer.add_argument("--measure", required=True, choices=[m.value for m in Measure])
    infer.add_argument("--mode", required=True, choices=MODES)
    infer.add_argument("--p", type=int)
    infer.add_argument("--alpha", type=float, default=0.05)
    infer.add_argument("--delta", type=float)
    infer.add_argument("--nu", type=float)
    infer.add_argument("--p-max", type=int)
    infer.add_argument("--p0", type=int)
    infer.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    infer.add_argument("--centered", action="store_true", help="subtract the sample mean")
    infer.add_argument("--table", help="W quantile table, built at this path if absent")
    infer.add_argument("--workers", type=int, default=default_workers())
    infer.set_defaults(func=cmd_infer)

    truth = commands.add_parser("truth", help="population measures of a process spec")
    truth.add_argument("--spec", required=True, help="catalog name or JSON spec file")
    truth.add_argument("--max-lag", type=int, default=7)
    truth.set_defaults(func=cmd_truth)

    reproduce = commands.add_parser("reproduce", help="run a scripted reproduction experiment")
    reproduce.add_argument("experiment", choices=sorted([*EXPERIMENTS, *EXPERIMENT_ALIASES]))
    reproduce.add_argument("--replicates", type=int, default=DEFAULT_EXPERIMENT_REPLICATES)
    reproduce.add_argument("--n", type=int, nargs="+", default=list(DEFAULT_SAMPLE_SIZES))
    reproduce.add_argument("--seed", type=int, default=0)
    reproduce.add_argument("--out-dir", default=".")
    reproduce.add_argument("--table", help="W quantile table, built at this path if absent")
    reproduce.add_argument("--workers", type=int, default=default_workers())
    reproduce.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["pivotfpe", *(sys.argv[1:] if argv is None else argv)]
    if args.command == "infer":
        _check_infer_args(parser, args)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except SeriesParseError as e:
        _emit({"error": type(e).__name__, "message": str(e), "line_number": e.line_number})
        return EXIT_PARSE
    except (PivotFPEException, ValueError) as e:
        _emit({"error": type(e).__name__, "message": str(e)})
        return EXIT_FAILED
    except OSError as e:
        _emit({"error": type(e).__name__, "message": str(e)})
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
