"""
Random forest ensemble with in-bag bookkeeping

Tree j is grown on a bootstrap sample whose multiplicities are kept in row j
of the B x n `inbag` matrix; observation i is out-of-bag for tree j exactly
when inbag[j, i] == 0.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from oob_forest.dataset import ColumnMeta, Dataset
from oob_forest.errors import EmptySubforestError, InvalidArgumentError
from oob_forest.forest.rng import tree_stream
from oob_forest.forest.tree import Tree, predict_tree, predict_tree_batch, train_tree
from oob_forest.models import Task, TreeParams
from oob_forest.utils.logger import logger


class BootstrapSample(NamedTuple):
    """n draws with replacement from 0..n-1 and the matching multiplicity vector"""
    indices: np.ndarray
    counts: np.ndarray


def bootstrap_indices(n: int, rng: np.random.Generator) -> BootstrapSample:
    """Draw n indices uniformly with replacement from 0..n-1"""
    if n < 1:
        raise InvalidArgumentError(f"bootstrap sample size must be positive, got {n}")
    indices = rng.integers(0, n, size=n)
    return BootstrapSample(indices=indices, counts=np.bincount(indices, minlength=n))


@dataclass
class Forest:
    """Trained trees plus the in-bag multiplicity of every observation for every tree"""
    trees: List[Tree]
    inbag: np.ndarray
    task: Task
    master_seed: int
    params: TreeParams
    n_classes: int
    columns: List[ColumnMeta]

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n(self) -> int:
        return int(self.inbag.shape[1])

    @property
    def p(self) -> int:
        return len(self.columns)

    def oob_mask(self) -> np.ndarray:
        """B x n boolean matrix, True where observation i is out-of-bag for tree j"""
        return self.inbag == 0

    def oob_sets(self) -> List[np.ndarray]:
        """O_i for every observation: indices of the trees that did not see it"""
        mask = self.oob_mask()
        return [np.flatnonzero(mask[:, i]) for i in range(self.n)]

    def check_data(self, data: Dataset) -> None:
        """Raise unless `data` is the sample this forest was trained on (size and schema)"""
        if data.n != self.n:
            raise InvalidArgumentError(f"forest was trained on n={self.n} rows, dataset has {data.n}")
        if data.task != self.task:
            raise InvalidArgumentError(f"forest task is {self.task}, dataset task is {data.task}")
        ours = [(c.name, c.kind, c.n_levels) for c in self.columns]
        theirs = [(c.name, c.kind, c.n_levels) for c in data.columns]
        if ours != theirs:
            raise InvalidArgumentError("dataset columns do not match the forest's training schema")


def train_forest(
    data: Dataset,
    B: int,
    params: Optional[TreeParams] = None,
    master_seed: int = 0,
    threads: int = 1,
) -> Forest:
    """
    Grow B trees, each on its own bootstrap sample

    Tree j draws its bootstrap sample and its split features from the stream
    derived from (master_seed, j), so the result does not depend on `threads`.

    Args:
        data: training sample
        B: number of trees
        params: tree growth parameters (task defaults when None)
        master_seed: seed of the whole forest
        threads: worker threads used to grow trees

    Returns:
        Forest
    """
    if B < 1:
        raise InvalidArgumentError(f"number of trees must be positive, got {B}")
    if threads < 1:
        raise InvalidArgumentError(f"threads must be positive, got {threads}")
    params = (params or TreeParams()).resolve(data.p, data.task)

    logger.info(
        f"Training forest: n={data.n} p={data.p} task={data.task} B={B} "
        f"mtry={params.mtry} min_node_size={params.min_node_size} seed={master_seed}"
    )

    def grow(j: int):
        rng = tree_stream(master_seed, j)
        sample = bootstrap_indices(data.n, rng)
        return train_tree(data, sample.counts, params, rng), sample.counts

    if threads == 1:
        grown = [grow(j) for j in range(B)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            grown = list(executor.map(grow, range(B)))

    trees = [tree for tree, _ in grown]
    inbag = np.vstack([counts for _, counts in grown]).astype(np.int32)
    logger.debug(f"Forest trained: {sum(t.n_nodes for t in trees)} nodes in total")

    return Forest(
        trees=trees,
        inbag=inbag,
        task=data.task,
        master_seed=master_seed,
        params=params,
        n_classes=data.n_classes,
        columns=list(data.columns),
    )


def _member_trees(forest: Forest, trees: Optional[Sequence[int]]) -> np.ndarray:
    if trees is None:
        return np.arange(forest.n_trees)
    members = np.asarray(trees, dtype=np.int64).ravel()
    if members.size == 0:
        raise EmptySubforestError("cannot predict with an empty set of trees")
    if members.min() < 0 or members.max() >= forest.n_trees:
        raise InvalidArgumentError(f"tree indices must lie in 0..{forest.n_trees - 1}")
    return members


def aggregate(predictions: np.ndarray, task: Task, n_classes: int) -> float:
    """Mean of tree predictions, or their modal label with ties to the smallest label"""
    predictions = np.asarray(predictions)
    if predictions.size == 0:
        raise EmptySubforestError("cannot aggregate an empty set of tree predictions")
    if task == "regression":
        return float(predictions.mean())
    votes = np.bincount(predictions.astype(np.int64), minlength=n_classes + 1)[1:]
    return float(np.argmax(votes) + 1)


def predict_forest(forest: Forest, x: np.ndarray, trees: Optional[Sequence[int]] = None) -> float:
    """Forest (or sub-forest) prediction for one feature row"""
    members = _member_trees(forest, trees)
    predictions = np.array([predict_tree(forest.trees[j], x) for j in members])
    return aggregate(predictions, forest.task, forest.n_classes)


def predict_forest_batch(
    forest: Forest,
    X: np.ndarray,
    trees: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Forest prediction for every row of X

    Predictions are folded into a running sum (regression) or a vote table
    (classification) tree by tree, so memory stays O(rows) rather than O(B x rows).
    """
    members = _member_trees(forest, trees)
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]
    if forest.task == "regression":
        total = np.zeros(m, dtype=np.float64)
        for j in members:
            total += predict_tree_batch(forest.trees[j], X)
        return total / members.size

    votes = np.zeros((m, forest.n_classes), dtype=np.int64)
    rows = np.arange(m)
    for j in members:
        labels = predict_tree_batch(forest.trees[j], X).astype(np.int64)
        votes[rows, labels - 1] += 1
    return (np.argmax(votes, axis=1) + 1).astype(np.float64)


def loss(y_true: np.ndarray, y_pred: np.ndarray, task: Task) -> np.ndarray:
    """Per-observation squared error or 0/1 misclassification"""
    if task == "regression":
        return (np.asarray(y_true, dtype=np.float64) - y_pred) ** 2
    return (np.asarray(y_true) != y_pred).astype(np.float64)


def oob_fraction(forest: Forest) -> float:
    """mean_i |O_i| / B, which approaches (1 - 1/n)^n ~ e^-1"""
    return float(forest.oob_mask().mean())


def in_bag_error(forest: Forest, data: Dataset) -> float:
    """Error of the full forest on its own training sample"""
    forest.check_data(data)
    return float(loss(data.response, predict_forest_batch(forest, data.features), forest.task).mean())
