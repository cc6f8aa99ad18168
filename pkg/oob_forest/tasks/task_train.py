"""
Task: Train
Loads a CSV, grows the forest once, saves it with its in-bag bookkeeping
and training sample, and reports the OOB estimate of the generalization error.
"""
from pathlib import Path

from oob_forest.forest import oob_fraction, save_forest, train_forest
from oob_forest.ingest import load_csv
from oob_forest.models import RunConfig, TreeParams
from oob_forest.oobci import build_augmented, oob_estimate, per_observation_errors
from oob_forest.utils.logger import logger
from oob_forest.utils.storage import save_text


def tree_params(config: RunConfig) -> TreeParams:
    return TreeParams(mtry=config.mtry, min_node_size=config.min_node_size, max_depth=config.max_depth)


def cmd_train(config: RunConfig) -> float:
    """
    Train a forest and save it

    Args:
        config: validated flags (data_path, target, task, n_trees, seed, model_out, ...)

    Returns:
        The OOB estimate (also printed)
    """
    logger.info(f"[train] Loading {config.data_path}")
    data, schema = load_csv(config.data_path, config.target, config.task, delimiter=config.delimiter)

    forest = train_forest(data, config.n_trees, tree_params(config), config.seed, threads=config.threads)
    errors = per_observation_errors(build_augmented(forest, data, threads=config.threads), data)
    estimate = oob_estimate(errors)

    if config.model_out:
        save_forest(forest, config.model_out, data)
        schema_path = Path(config.model_out).with_name(Path(config.model_out).name + ".schema.txt")
        save_text(schema.to_text(), schema_path)
        logger.info(f"[train] Schema report written to {schema_path}")

    metric = "mean squared error" if data.task == "regression" else "misclassification rate"
    print(f"n = {data.n}, p = {data.p}, B = {forest.n_trees}, mtry = {forest.params.mtry}")
    print(f"mean OOB fraction = {oob_fraction(forest):.4f}")
    print(f"OOB estimate ({metric}) = {estimate!r}")
    if errors.excluded.size:
        print(f"excluded observations (never out-of-bag) = {errors.excluded.size}")
    return estimate
