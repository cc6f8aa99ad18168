"""
Random forest: bootstrap bookkeeping, CART trees and their aggregation
"""
from oob_forest.forest.ensemble import (
    Forest,
    bootstrap_indices,
    in_bag_error,
    oob_fraction,
    predict_forest,
    predict_forest_batch,
    train_forest,
)
from oob_forest.forest.persistence import load_forest, save_forest
from oob_forest.forest.splits import Split, best_split
from oob_forest.forest.tree import Tree, predict_tree, predict_tree_batch, train_tree

__all__ = [
    "Forest",
    "Split",
    "Tree",
    "best_split",
    "bootstrap_indices",
    "in_bag_error",
    "load_forest",
    "oob_fraction",
    "predict_forest",
    "predict_forest_batch",
    "predict_tree",
    "predict_tree_batch",
    "save_forest",
    "train_forest",
    "train_tree",
]
