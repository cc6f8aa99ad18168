"""
Forest model files

A model file is one self-describing JSON document (gzip-compressed when the
path ends in .gz) holding the trees, the in-bag matrix, the growth
parameters, the master seed and the training sample itself, so interval
computation can run from the file alone.
"""

from typing import Optional, Tuple

import numpy as np

from oob_forest.dataset import ColumnMeta, Dataset
from oob_forest.errors import ModelFileError
from oob_forest.forest.ensemble import Forest
from oob_forest.forest.tree import Tree
from oob_forest.models import TreeParams
from oob_forest.utils.logger import logger
from oob_forest.utils.storage import load_json, save_json

MODEL_FORMAT = "oob-forest-model"
MODEL_VERSION = 1


def forest_to_dict(forest: Forest, data: Optional[Dataset] = None) -> dict:
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "task": forest.task,
        "master_seed": forest.master_seed,
        "params": forest.params.model_dump(),
        "n_classes": forest.n_classes,
        "columns": [c.to_dict() for c in forest.columns],
        "inbag": forest.inbag.tolist(),
        "trees": [tree.to_dict() for tree in forest.trees],
    }
    if data is not None:
        forest.check_data(data)
        document["training_data"] = data.to_dict()
    return document


def forest_from_dict(document: dict) -> Tuple[Forest, Optional[Dataset]]:
    if document.get("format") != MODEL_FORMAT:
        raise ModelFileError(f"not a forest model file (format={document.get('format')!r})")
    if document.get("version") != MODEL_VERSION:
        raise ModelFileError(f"unsupported model file version {document.get('version')!r}")
    try:
        columns = [ColumnMeta.from_dict(c) for c in document["columns"]]
        task = document["task"]
        forest = Forest(
            trees=[Tree.from_dict(t, task, len(columns)) for t in document["trees"]],
            inbag=np.asarray(document["inbag"], dtype=np.int32),
            task=task,
            master_seed=int(document["master_seed"]),
            params=TreeParams(**document["params"]),
            n_classes=int(document["n_classes"]),
            columns=columns,
        )
        data = Dataset.from_dict(document["training_data"]) if "training_data" in document else None
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFileError(f"corrupt model file: {e}") from e
    if forest.inbag.shape[0] != forest.n_trees:
        raise ModelFileError("in-bag matrix does not have one row per tree")
    return forest, data


def save_forest(forest: Forest, path: str, data: Optional[Dataset] = None) -> str:
    """Write a forest (and optionally its training sample) to `path`"""
    saved = save_json(forest_to_dict(forest, data), path)
    logger.info(f"Saved forest with {forest.n_trees} trees to {saved}")
    return saved


def load_forest(path: str) -> Tuple[Forest, Optional[Dataset]]:
    """Read a forest written by save_forest; returns (forest, training data or None)"""
    document = load_json(path)
    forest, data = forest_from_dict(document)
    logger.info(f"Loaded forest with {forest.n_trees} trees from {path}")
    return forest, data
