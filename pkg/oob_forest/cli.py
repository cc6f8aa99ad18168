"""
Command-line interface

    oob-forest train    --data FILE --target COL --task regression --trees 500 --model-out model.json
    oob-forest ci       --model model.json --levels 0.90,0.95,0.99 --boot 1000
    oob-forest simulate --process friedman --n 200,500 --out-dir output
    oob-forest datagen  --process friedman --n 500 --seed 7 --out file.csv

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from oob_forest import __version__
from oob_forest.config import get_settings
from oob_forest.errors import (
    InvalidArgumentError,
    InvalidDatasetError,
    ModelFileError,
    NoOobInformationError,
    UsageError,
)
from oob_forest.models import COVERAGE_LEVELS, CI_LEVELS, RunConfig
from oob_forest.tasks.task_ci import cmd_ci
from oob_forest.tasks.task_datagen import cmd_datagen
from oob_forest.tasks.task_simulate import cmd_simulate
from oob_forest.tasks.task_train import cmd_train
from oob_forest.utils.logger import logger, set_verbosity

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

COMMANDS = {
    "train": cmd_train,
    "ci": cmd_ci,
    "simulate": cmd_simulate,
    "datagen": cmd_datagen,
}


class _Parser(argparse.ArgumentParser):
    """argparse reports problems through UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.seed,
                        help=f"master seed for every random draw (default {settings.seed}, env OOBF_SEED)")
    common.add_argument("--threads", type=int, default=settings.threads,
                        help="worker threads; results do not depend on it (env OOBF_THREADS)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    forest = argparse.ArgumentParser(add_help=False)
    forest.add_argument("--data", dest="data_path", help="training CSV with a header row")
    forest.add_argument("--target", help="response column name")
    forest.add_argument("--task", choices=["regression", "classification"])
    forest.add_argument("--delimiter", default=",", help="CSV field separator (default ',')")
    forest.add_argument("--trees", dest="n_trees", type=int, default=None,
                        help=f"number of trees B (default {settings.trees}, env OOBF_TREES)")
    forest.add_argument("--mtry", type=int, help="candidate features per split (default floor(p/3) or floor(sqrt(p)))")
    forest.add_argument("--min-node-size", type=int, help="minimum in-bag weight to attempt a split (default 5 or 1)")
    forest.add_argument("--max-depth", type=int, help="depth cap (default none)")

    parser = _Parser(
        prog="oob-forest",
        description="Random forests with out-of-bag bootstrap confidence intervals for the generalization error",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    train = sub.add_parser("train", parents=[common, forest], help="train a forest and print its OOB estimate")
    train.add_argument("--model-out", help="where to save the model (JSON, .gz compresses)")

    ci = sub.add_parser("ci", parents=[common, forest], help="OOB percentile-bootstrap confidence intervals")
    ci.add_argument("--model", dest="model_path", help="saved model; otherwise a forest is trained on --data")
    ci.add_argument("--levels", type=_float_list, default=list(CI_LEVELS),
                    help="comma-separated confidence levels (default 0.90,0.95,0.99)")
    ci.add_argument("--boot", dest="n_boot", type=int, default=None,
                    help=f"bootstrap replicates M, at least 2 (default {settings.bootstrap_replicates})")
    ci.add_argument("--rmse", action="store_true", help="report regression intervals on the root-MSE scale")
    ci.add_argument("--csv", dest="csv_out", help="also write the table as CSV")
    ci.add_argument("--out", help="also write line records: level lower upper point_estimate M seed")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo coverage study")
    simulate.add_argument("--process", choices=["friedman", "spheres"], required=True)
    simulate.add_argument("--n", dest="sizes", type=_int_list, default=[200, 500],
                          help="comma-separated training sizes (default 200,500)")
    simulate.add_argument("--n-test", type=int, default=20_000, help="test sample size (default 20000)")
    simulate.add_argument("--trees", dest="n_trees", type=int, default=300, help="trees per forest B (default 300)")
    simulate.add_argument("--boot", dest="n_boot", type=int, default=500, help="bootstrap replicates M (default 500)")
    simulate.add_argument("--replications", dest="n_replications", type=int, default=200,
                          help="replications N (default 200)")
    simulate.add_argument("--levels", type=_float_list, default=list(COVERAGE_LEVELS),
                          help="comma-separated nominal levels (default 0.05,...,0.95)")
    simulate.add_argument("--mtry", type=int)
    simulate.add_argument("--min-node-size", type=int)
    simulate.add_argument("--out-dir", default=settings.output_dir,
                          help=f"report directory (default {settings.output_dir}, env OOBF_OUTPUT_DIR)")
    simulate.add_argument("--pdf", action="store_true", help="also render the report as PDF")

    datagen = sub.add_parser("datagen", parents=[common], help="write a synthetic sample as CSV")
    datagen.add_argument("--process", choices=["friedman", "spheres"], required=True)
    datagen.add_argument("--n", type=int, required=True, help="number of rows")
    datagen.add_argument("--out", required=True, help="destination CSV")

    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    """
    Parse and validate flags into a RunConfig without touching any file

    Raises:
        UsageError: unknown flag or malformed value
        pydantic.ValidationError: a value violates a downstream precondition
    """
    args = vars(build_parser().parse_args(argv))
    set_verbosity(args.pop("verbose", False))
    settings = get_settings()
    if args["command"] in ("train", "ci"):
        if args.get("n_trees") is None:
            args["n_trees"] = settings.trees
    if args["command"] == "ci" and args.get("n_boot") is None:
        args["n_boot"] = settings.bootstrap_replicates
    return RunConfig(**{k: v for k, v in args.items() if v is not None})


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except ValidationError as e:
        logger.error(f"Invalid arguments:\n{e}")
        return EXIT_USAGE

    try:
        COMMANDS[config.command](config)
    except (InvalidDatasetError, ModelFileError, FileNotFoundError, NoOobInformationError) as e:
        logger.error(f"{config.command} failed: {e}", exc_info=True)
        return EXIT_DATA
    except InvalidArgumentError as e:
        logger.error(f"{config.command} failed: {e}", exc_info=True)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{config.command} failed with an internal error: {e}", exc_info=True)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
