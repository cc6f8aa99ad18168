"""
Task: Confidence intervals
Computes OOB percentile-bootstrap intervals at several levels from one
shared replicate vector, either for a saved forest or for a freshly trained one.
"""
import math
from typing import List

import pandas as pd

from oob_forest.errors import InvalidArgumentError
from oob_forest.forest import load_forest, train_forest
from oob_forest.ingest import load_csv
from oob_forest.models import CiResult, RunConfig
from oob_forest.oobci import bootstrap_cis, build_augmented, per_observation_errors, transform_ci
from oob_forest.tasks.task_train import tree_params
from oob_forest.utils.logger import logger
from oob_forest.utils.storage import save_csv, save_text


def format_ci_table(results: List[CiResult], label: str) -> str:
    """Columns: confidence level | lower | upper"""
    lines = [
        f"{'confidence level':>16} | {'lower':>14} | {'upper':>14}",
        "-" * 50,
    ]
    for r in results:
        lines.append(f"{r.level:>16.2f} | {r.lower:>14.6g} | {r.upper:>14.6g}")
    lines.append("")
    lines.append(f"{label} point estimate: {results[0].point_estimate:.6g} (M = {results[0].M}, seed = {results[0].seed})")
    return "\n".join(lines)


def cmd_ci(config: RunConfig) -> List[CiResult]:
    """
    Compute and print intervals for every requested level

    Returns:
        One CiResult per level, in level order
    """
    data = None
    if config.model_path:
        forest, data = load_forest(config.model_path)
        if data is None:
            if not (config.data_path and config.target):
                raise InvalidArgumentError("model file holds no training data; pass --data and --target")
            data, _ = load_csv(config.data_path, config.target, forest.task, delimiter=config.delimiter)
    else:
        logger.info(f"[ci] No model given; training on {config.data_path}")
        data, _ = load_csv(config.data_path, config.target, config.task, delimiter=config.delimiter)
        forest = train_forest(data, config.n_trees, tree_params(config), config.seed, threads=config.threads)

    errors = per_observation_errors(build_augmented(forest, data, threads=config.threads), data)
    results = bootstrap_cis(errors, config.levels, config.n_boot, config.seed)

    label = "OOB mean squared error" if forest.task == "regression" else "OOB misclassification rate"
    if config.rmse:
        if forest.task != "regression":
            raise InvalidArgumentError("--rmse applies to regression forests only")
        results = [transform_ci(r, math.sqrt) for r in results]
        label = "OOB root mean squared error"

    print(format_ci_table(results, label))

    if config.out:
        save_text("\n".join(r.to_record() for r in results), config.out)
        logger.info(f"[ci] Records written to {config.out}")
    if config.csv_out:
        frame = pd.DataFrame(
            [(r.level, r.lower, r.upper, r.point_estimate, r.M, r.seed) for r in results],
            columns=["level", "lower", "upper", "point_estimate", "M", "seed"],
        )
        save_csv(frame, config.csv_out)
        logger.info(f"[ci] CSV written to {config.csv_out}")
    return results
