"""
CART tree grown on one bootstrap sample

Nodes are stored in flat arrays (preorder ids, root = 0). A node with
feature == -1 is a leaf whose `value` is the in-bag mean (regression) or
the in-bag majority label (classification, ties to the smallest label).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from oob_forest.dataset import Dataset
from oob_forest.errors import InvalidArgumentError
from oob_forest.forest.rng import TREE_STREAM, derive_stream
from oob_forest.forest.splits import Split, find_split
from oob_forest.models import Task, TreeParams

LEAF = -1


@dataclass
class Tree:
    """Binary decision tree in array form"""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    default_left: np.ndarray
    task: Task
    n_features: int
    # node id -> boolean mask over the column's levels (True = go left)
    categorical: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int((self.feature == LEAF).sum())

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if np.isnan(t) else float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "default_left": self.default_left.astype(int).tolist(),
            "categorical": {
                str(k): {"size": int(v.shape[0]), "left": np.flatnonzero(v).tolist()}
                for k, v in self.categorical.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict, task: Task, n_features: int) -> "Tree":
        categorical = {}
        for key, entry in data.get("categorical", {}).items():
            mask = np.zeros(entry["size"], dtype=bool)
            mask[entry["left"]] = True
            categorical[int(key)] = mask
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray([np.nan if t is None else t for t in data["threshold"]], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=np.float64),
            default_left=np.asarray(data["default_left"], dtype=bool),
            task=task,
            n_features=n_features,
            categorical=categorical,
        )


class _TreeBuilder:
    """Accumulates node arrays while the tree is grown"""

    def __init__(self):
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.value: List[float] = []
        self.default_left: List[bool] = []
        self.categorical: Dict[int, np.ndarray] = {}

    def new_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(np.nan)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(np.nan)
        self.default_left.append(True)
        return len(self.feature) - 1

    def make_leaf(self, node: int, value: float) -> None:
        self.value[node] = value

    def make_split(self, node: int, split: Split, n_levels: int) -> tuple:
        left, right = self.new_node(), self.new_node()
        self.feature[node] = split.feature
        self.left[node] = left
        self.right[node] = right
        self.default_left[node] = split.default_left
        if split.is_categorical:
            mask = np.full(n_levels, split.default_left, dtype=bool)
            mask[list(split.left_levels)] = True
            mask[list(split.right_levels)] = False
            self.categorical[node] = mask
        else:
            self.threshold[node] = split.threshold
        return left, right

    def build(self, task: Task, n_features: int) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
            default_left=np.asarray(self.default_left, dtype=bool),
            task=task,
            n_features=n_features,
            categorical=self.categorical,
        )


def leaf_value(y: np.ndarray, w: np.ndarray, task: Task, n_classes: int) -> float:
    """Weighted mean, or weighted majority label with ties to the smallest label"""
    if task == "regression":
        return float(np.dot(w, y) / w.sum())
    votes = np.bincount(y.astype(np.int64), weights=w, minlength=n_classes + 1)[1:]
    return float(np.argmax(votes) + 1)


def train_tree(
    data: Dataset,
    multiplicities: np.ndarray,
    params: TreeParams,
    rng: Optional[np.random.Generator] = None,
) -> Tree:
    """
    Grow one CART tree on the bootstrap sample described by `multiplicities`

    At each node `mtry` features are drawn without replacement and the best
    split among them is kept. A node becomes a leaf when its in-bag weight
    is at most min_node_size, when it reaches max_depth, when its responses
    are all equal, or when no drawn feature improves impurity.

    Args:
        data: training sample
        multiplicities: length-n in-bag counts summing to n
        params: growth parameters (resolved against data.p if mtry is unset)
        rng: the tree's own random stream; defaults to the tree stream keyed by params.seed

    Returns:
        Trained Tree
    """
    multiplicities = np.asarray(multiplicities)
    if multiplicities.shape != (data.n,):
        raise InvalidArgumentError(f"expected {data.n} multiplicities, got shape {multiplicities.shape}")
    if int(multiplicities.sum()) != data.n:
        raise InvalidArgumentError(f"multiplicities sum to {int(multiplicities.sum())}, expected n={data.n}")

    params = params.resolve(data.p, data.task)
    if rng is None:
        rng = derive_stream(params.seed, TREE_STREAM)
    task = data.task
    n_classes = data.n_classes
    categorical = data.categorical_mask
    X, Y = data.features, data.response

    rows = np.flatnonzero(multiplicities > 0)
    weights = multiplicities[rows].astype(np.float64)

    builder = _TreeBuilder()
    stack = [(builder.new_node(), rows, weights, 0)]
    while stack:
        node, rows, w, depth = stack.pop()
        y = Y[rows]
        if (
            w.sum() <= params.min_node_size
            or (params.max_depth is not None and depth >= params.max_depth)
            or np.all(y == y[0])
        ):
            builder.make_leaf(node, leaf_value(y, w, task, n_classes))
            continue

        best: Optional[Split] = None
        for f in rng.choice(data.p, size=params.mtry, replace=False):
            f = int(f)
            split = find_split(f, X[rows, f], y, w, task, n_classes, categorical=categorical[f])
            if split is not None and (best is None or split.decrease > best.decrease):
                best = split

        if best is None:
            builder.make_leaf(node, leaf_value(y, w, task, n_classes))
            continue

        go_left = best.goes_left(X[rows, best.feature])
        left, right = builder.make_split(node, best, data.columns[best.feature].n_levels)
        stack.append((right, rows[~go_left], w[~go_left], depth + 1))
        stack.append((left, rows[go_left], w[go_left], depth + 1))

    return builder.build(task, data.p)


def predict_tree(tree: Tree, x: np.ndarray) -> float:
    """Route one feature row from the root to a leaf and return its prediction"""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tree.n_features,):
        raise InvalidArgumentError(f"feature row has shape {x.shape}, expected ({tree.n_features},)")
    node = 0
    while tree.feature[node] != LEAF:
        value = x[tree.feature[node]]
        mask = tree.categorical.get(node)
        if mask is None:
            go_left = value <= tree.threshold[node]
        else:
            code = int(value)
            go_left = bool(mask[code]) if 0 <= code < mask.shape[0] else bool(tree.default_left[node])
        node = tree.left[node] if go_left else tree.right[node]
    return float(tree.value[node])


def predict_tree_batch(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Vectorized predict_tree over the rows of X"""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise InvalidArgumentError(f"feature matrix has shape {X.shape}, expected (m, {tree.n_features})")
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(tree.feature[node] != LEAF)
    while active.size:
        nd = node[active]
        vals = X[active, tree.feature[nd]]
        go_left = vals <= tree.threshold[nd]
        if tree.categorical:
            for cat_node, mask in tree.categorical.items():
                sel = nd == cat_node
                if not sel.any():
                    continue
                codes = vals[sel].astype(np.int64)
                known = (codes >= 0) & (codes < mask.shape[0])
                routed = np.full(codes.shape, tree.default_left[cat_node])
                routed[known] = mask[codes[known]]
                go_left[sel] = routed
        nxt = np.where(go_left, tree.left[nd], tree.right[nd])
        node[active] = nxt
        active = active[tree.feature[nxt] != LEAF]
    return tree.value[node]
