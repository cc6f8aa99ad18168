"""
CART split search

Rows reach a node with a weight equal to their in-bag multiplicity, so a
row drawn three times into the bootstrap sample counts three times in every
sum below. Regression minimizes the children's summed squared deviation
from their means; classification minimizes the weighted Gini mass W*(1 - sum p_k^2).
"""

from dataclasses import dataclass
from typing import FrozenSet, Optional

import numpy as np

from oob_forest.dataset import Dataset
from oob_forest.errors import InvalidArgumentError
from oob_forest.models import Task

# Level-subset search is exhaustive up to this many levels present at a node
MAX_EXHAUSTIVE_LEVELS = 10

# Relative improvement below which a split is treated as no improvement
_REL_TOL = 1e-12


@dataclass(frozen=True)
class Split:
    """
    Best binary partition found on one feature

    Numeric splits send "value <= threshold" left. Categorical splits send
    left_levels left and right_levels right; a level seen on neither side
    follows default_left (the side with more in-bag weight).
    """
    feature: int
    decrease: float
    left_weight: float
    right_weight: float
    threshold: float = float("nan")
    left_levels: Optional[FrozenSet[int]] = None
    right_levels: Optional[FrozenSet[int]] = None

    @property
    def is_categorical(self) -> bool:
        return self.left_levels is not None

    @property
    def default_left(self) -> bool:
        return self.left_weight >= self.right_weight

    def goes_left(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if not self.is_categorical:
            return values <= self.threshold
        left = np.isin(values, list(self.left_levels))
        right = np.isin(values, list(self.right_levels))
        unseen = ~(left | right)
        return left | (unseen & self.default_left)


def node_impurity(y: np.ndarray, w: np.ndarray, task: Task, n_classes: int = 0) -> float:
    """Weighted sum of squares (regression) or weighted Gini mass (classification)"""
    total = w.sum()
    if total <= 0:
        return 0.0
    if task == "regression":
        mean = np.dot(w, y) / total
        return float(np.dot(w, (y - mean) ** 2))
    counts = np.bincount(y.astype(np.int64), weights=w, minlength=n_classes + 1)[1:]
    return float(total - np.dot(counts, counts) / total)


def _class_weights(y: np.ndarray, w: np.ndarray, n_classes: int) -> np.ndarray:
    """Row-wise weighted one-hot encoding of labels 1..L"""
    onehot = np.zeros((y.shape[0], n_classes), dtype=np.float64)
    onehot[np.arange(y.shape[0]), y.astype(np.int64) - 1] = w
    return onehot


def _children_impurity_regression(lw, ls, lq, W, S, Q):
    rw = W - lw
    with np.errstate(divide="ignore", invalid="ignore"):
        left = lq - ls * ls / lw
        right = (Q - lq) - (S - ls) ** 2 / rw
    return left + right


def _children_impurity_gini(lw, lc, W, C):
    rw = W - lw
    rc = C - lc
    with np.errstate(divide="ignore", invalid="ignore"):
        left = lw - (lc * lc).sum(axis=-1) / lw
        right = rw - (rc * rc).sum(axis=-1) / rw
    return left + right


def _accept(parent: float, children: float) -> Optional[float]:
    decrease = parent - children
    if not np.isfinite(decrease) or parent <= 0.0 or decrease <= parent * _REL_TOL:
        return None
    return float(decrease)


def _best_numeric(feature, x, y, w, task, n_classes) -> Optional[Split]:
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None

    ws = w[order]
    cw = np.cumsum(ws)[:-1]
    W = ws.sum()

    if task == "regression":
        yc = y[order] - np.dot(ws, y[order]) / W
        wy = ws * yc
        cs = np.cumsum(wy)[:-1]
        cq = np.cumsum(wy * yc)[:-1]
        S, Q = wy.sum(), np.dot(wy, yc)
        parent = Q - S * S / W
        children = _children_impurity_regression(cw, cs, cq, W, S, Q)
    else:
        onehot = _class_weights(y[order], ws, n_classes)
        cc = np.cumsum(onehot, axis=0)[:-1]
        C = onehot.sum(axis=0)
        parent = W - np.dot(C, C) / W
        children = _children_impurity_gini(cw, cc, W, C)

    children = np.where(valid, children, np.inf)
    k = int(np.argmin(children))
    decrease = _accept(parent, children[k])
    if decrease is None:
        return None

    threshold = 0.5 * (xs[k] + xs[k + 1])
    if threshold >= xs[k + 1]:
        # adjacent floats: the midpoint rounds up onto the right value
        threshold = xs[k]
    return Split(
        feature=feature,
        decrease=decrease,
        left_weight=float(cw[k]),
        right_weight=float(W - cw[k]),
        threshold=float(threshold),
    )


def _best_categorical(feature, codes, y, w, task, n_classes) -> Optional[Split]:
    codes = codes.astype(np.int64)
    present = np.unique(codes)
    K = present.shape[0]
    if K < 2:
        return None

    # Per-level sufficient statistics, restricted to levels present at the node
    size = int(present[-1]) + 1
    lw_all = np.bincount(codes, weights=w, minlength=size)[present]
    W = lw_all.sum()
    if task == "regression":
        yc = y - np.dot(w, y) / W
        level_stats = np.column_stack([
            lw_all,
            np.bincount(codes, weights=w * yc, minlength=size)[present],
            np.bincount(codes, weights=w * yc * yc, minlength=size)[present],
        ])
    else:
        onehot = _class_weights(y, w, n_classes)
        counts = np.zeros((size, n_classes), dtype=np.float64)
        np.add.at(counts, codes, onehot)
        level_stats = np.column_stack([lw_all, counts[present]])

    if K <= MAX_EXHAUSTIVE_LEVELS:
        # Every subset that keeps the last present level on the right
        masks = np.arange(1, 2 ** (K - 1), dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(K)) & 1).astype(np.float64)
    else:
        # Order levels by mean response / class-1 share and cut like an ordinal feature
        # column 1 holds the weighted response sum or the class-1 weight
        key = level_stats[:, 1] / level_stats[:, 0]
        rank = np.argsort(key, kind="mergesort")
        bits = np.zeros((K - 1, K), dtype=np.float64)
        for k in range(K - 1):
            bits[k, rank[: k + 1]] = 1.0

    left = bits @ level_stats
    totals = level_stats.sum(axis=0)
    if task == "regression":
        S, Q = totals[1], totals[2]
        parent = Q - S * S / W
        children = _children_impurity_regression(left[:, 0], left[:, 1], left[:, 2], W, S, Q)
    else:
        C = totals[1:]
        parent = W - np.dot(C, C) / W
        children = _children_impurity_gini(left[:, 0], left[:, 1:], W, C)

    k = int(np.argmin(children))
    decrease = _accept(parent, children[k])
    if decrease is None:
        return None

    goes_left = bits[k].astype(bool)
    return Split(
        feature=feature,
        decrease=decrease,
        left_weight=float(left[k, 0]),
        right_weight=float(W - left[k, 0]),
        left_levels=frozenset(int(v) for v in present[goes_left]),
        right_levels=frozenset(int(v) for v in present[~goes_left]),
    )


def find_split(
    feature: int,
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    task: Task,
    n_classes: int = 0,
    categorical: bool = False,
) -> Optional[Split]:
    """Best split of one feature column over the node's rows (arrays already restricted to the node)"""
    if categorical:
        return _best_categorical(feature, x, y, w, task, n_classes)
    return _best_numeric(feature, x, y, w, task, n_classes)


def best_split(
    rows: np.ndarray,
    feature: int,
    data: Dataset,
    task: Optional[Task] = None,
    weights: Optional[np.ndarray] = None,
) -> Optional[Split]:
    """
    Best split of `feature` over the given rows of `data`

    Args:
        rows: row indices of the node (non-empty)
        feature: column index
        data: training sample
        task: defaults to data.task
        weights: per-row multiplicities (default 1 each)

    Returns:
        The impurity-minimizing Split, or None when the column is constant
        over the rows or no split strictly decreases impurity
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise InvalidArgumentError("best_split needs at least one row")
    if not 0 <= feature < data.p:
        raise InvalidArgumentError(f"feature {feature} outside 0..{data.p - 1}")
    task = task or data.task
    w = np.ones(rows.size) if weights is None else np.asarray(weights, dtype=np.float64)
    return find_split(
        feature,
        data.features[rows, feature],
        data.response[rows],
        w,
        task,
        n_classes=data.n_classes,
        categorical=data.columns[feature].is_categorical,
    )
