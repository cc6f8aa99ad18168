"""
Out-of-bag confidence intervals for the forest's generalization error

The forest is trained once. Its in-bag bookkeeping and each tree's
predictions on the observations it never saw form the augmented sample;
the interval only depends on that sample through the per-observation OOB
errors, so bootstrap replicates resample those errors directly.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from oob_forest.dataset import Dataset
from oob_forest.errors import InvalidArgumentError, NoOobInformationError
from oob_forest.forest.ensemble import Forest, aggregate, loss
from oob_forest.forest.rng import BOOTSTRAP_CI_STREAM, derive_stream
from oob_forest.forest.tree import predict_tree_batch
from oob_forest.models import CiResult, Task
from oob_forest.utils.logger import logger

# Upper bound on the number of resampled indices held in memory at once
_DRAW_BLOCK = 2_000_000


@dataclass
class AugmentedSample:
    """
    Per observation i: the out-of-bag tree set O_i and the predictions
    y_hat_ij of those trees for x_i (same order as oob_sets[i]).
    """
    task: Task
    n_trees: int
    n_classes: int
    oob_sets: List[np.ndarray]
    oob_predictions: List[np.ndarray]
    # Full B x n prediction matrix, only when requested for debugging
    all_predictions: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.oob_sets)

    def oob_sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.oob_sets], dtype=np.int64)


@dataclass
class ErrorVector:
    """Per-observation OOB errors, with observations lacking any OOB tree set aside"""
    values: np.ndarray
    excluded: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    task: Optional[Task] = None

    @property
    def n_effective(self) -> int:
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return self.n_effective + int(self.excluded.shape[0])


def build_augmented(
    forest: Forest,
    data: Dataset,
    keep_all_predictions: bool = False,
    threads: int = 1,
) -> AugmentedSample:
    """
    Collect O_i and the OOB tree predictions for every training observation

    Args:
        forest: forest trained on `data`
        data: the training sample
        keep_all_predictions: also store every tree's prediction for every row
        threads: worker threads for per-tree prediction

    Returns:
        AugmentedSample
    """
    forest.check_data(data)
    oob = forest.oob_mask()
    X = data.features

    def tree_oob(j: int):
        rows = np.flatnonzero(oob[j])
        if keep_all_predictions:
            full = predict_tree_batch(forest.trees[j], X)
            return rows, full[rows], full
        return rows, predict_tree_batch(forest.trees[j], X[rows]), None

    if threads == 1:
        per_tree = [tree_oob(j) for j in range(forest.n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            per_tree = list(executor.map(tree_oob, range(forest.n_trees)))

    rows = np.concatenate([r for r, _, _ in per_tree])
    trees = np.concatenate([np.full(r.size, j, dtype=np.int64) for j, (r, _, _) in enumerate(per_tree)])
    preds = np.concatenate([p for _, p, _ in per_tree])

    # Group by observation; the stable sort keeps tree order within each group
    order = np.argsort(rows, kind="stable")
    bounds = np.cumsum(np.bincount(rows, minlength=data.n))[:-1]
    oob_sets = np.split(trees[order], bounds)
    oob_predictions = np.split(preds[order], bounds)

    all_predictions = None
    if keep_all_predictions:
        all_predictions = np.vstack([full for _, _, full in per_tree])

    aug = AugmentedSample(
        task=forest.task,
        n_trees=forest.n_trees,
        n_classes=forest.n_classes,
        oob_sets=oob_sets,
        oob_predictions=oob_predictions,
        all_predictions=all_predictions,
    )
    logger.debug(f"Augmented sample: mean |O_i| = {aug.oob_sizes().mean():.2f} of B={forest.n_trees}")
    return aug


def per_observation_errors(aug: AugmentedSample, data: Dataset) -> ErrorVector:
    """
    Loss of each observation's OOB sub-forest prediction

    Squared residual of the OOB mean (regression) or 0/1 mismatch of the OOB
    modal vote, ties to the smallest label (classification). Observations
    with an empty O_i are listed in `excluded`.

    Raises:
        NoOobInformationError: if every observation has an empty O_i
    """
    if aug.n != data.n:
        raise InvalidArgumentError(f"augmented sample has {aug.n} observations, dataset has {data.n}")
    sizes = aug.oob_sizes()
    kept = np.flatnonzero(sizes > 0)
    excluded = np.flatnonzero(sizes == 0)
    if kept.size == 0:
        raise NoOobInformationError("no observation was out-of-bag for any tree")
    if excluded.size:
        logger.warning(f"{excluded.size} observation(s) were in-bag for every tree and are excluded")

    predicted = np.array([aggregate(aug.oob_predictions[i], aug.task, aug.n_classes) for i in kept])
    values = loss(data.response[kept], predicted, aug.task)
    return ErrorVector(values=values, excluded=excluded, task=aug.task)


def oob_estimate(errors: ErrorVector) -> float:
    """OOB estimate of the generalization error: mean of the retained per-observation errors"""
    if errors.n_effective == 0:
        raise NoOobInformationError("error vector is empty")
    return float(errors.values.mean())


def bootstrap_replicates(errors: ErrorVector, M: int, seed: int) -> np.ndarray:
    """
    M bootstrap replicates of the OOB estimate

    Replicate m is the mean of n_effective draws with replacement from
    errors.values. All draws come from one stream derived from `seed`.
    """
    if M < 1:
        raise InvalidArgumentError(f"number of bootstrap replicates must be positive, got {M}")
    n_eff = errors.n_effective
    if n_eff < 2:
        raise InvalidArgumentError(f"need at least 2 retained observations to bootstrap, got {n_eff}")

    rng = derive_stream(seed, BOOTSTRAP_CI_STREAM)
    block = max(1, _DRAW_BLOCK // n_eff)
    replicates = np.empty(M, dtype=np.float64)
    for start in range(0, M, block):
        stop = min(M, start + block)
        draws = rng.integers(0, n_eff, size=(stop - start, n_eff))
        replicates[start:stop] = errors.values[draws].mean(axis=1)
    return replicates


def empirical_quantile(samples: Sequence[float], q: float) -> float:
    """
    ceil(q*M)-th smallest of M samples (1-indexed)

    A 1e-9 slack absorbs representation error in q*M, so q = 0.025 with
    M = 1000 picks the 25th order statistic.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size == 0:
        raise InvalidArgumentError("cannot take a quantile of an empty sample")
    if not 0.0 < q < 1.0:
        raise InvalidArgumentError(f"quantile probability {q} is outside (0, 1)")
    m = samples.size
    k = min(m, max(1, math.ceil(q * m - 1e-9)))
    return float(np.partition(samples, k - 1)[k - 1])


def ci_from_replicates(
    replicates: np.ndarray,
    level: float,
    point_estimate: float,
    seed: int,
    task: Optional[Task] = None,
    keep_replicates: bool = False,
) -> CiResult:
    """Percentile interval at `level` from an existing replicate vector"""
    if not 0.0 < level < 1.0:
        raise InvalidArgumentError(f"confidence level {level} is outside (0, 1)")
    lower = empirical_quantile(replicates, (1.0 - level) / 2.0)
    upper = empirical_quantile(replicates, (1.0 + level) / 2.0)
    return CiResult(
        level=level,
        lower=lower,
        upper=upper,
        point_estimate=point_estimate,
        M=int(np.asarray(replicates).size),
        seed=seed,
        task=task,
        replicates=np.asarray(replicates).tolist() if keep_replicates else None,
    )


def bootstrap_cis(
    errors: ErrorVector,
    levels: Sequence[float],
    M: int,
    seed: int,
    keep_replicates: bool = False,
) -> List[CiResult]:
    """Intervals at several levels from one shared replicate vector (hence nested)"""
    if M < 2:
        raise InvalidArgumentError(f"need at least 2 bootstrap replicates, got {M}")
    point = oob_estimate(errors)
    replicates = bootstrap_replicates(errors, M, seed)
    results = [
        ci_from_replicates(replicates, level, point, seed, errors.task, keep_replicates)
        for level in levels
    ]
    logger.info(
        f"OOB estimate {point:.6g} from n_effective={errors.n_effective}; "
        + ", ".join(f"{r.level:g}: [{r.lower:.6g}, {r.upper:.6g}]" for r in results)
    )
    return results


def bootstrap_ci(
    errors: ErrorVector,
    level: float,
    M: int,
    seed: int,
    keep_replicates: bool = False,
) -> CiResult:
    """Level-`level` percentile-bootstrap interval for the generalization error"""
    return bootstrap_cis(errors, [level], M, seed, keep_replicates)[0]


def transform_ci(result: CiResult, g: Callable[[float], float]) -> CiResult:
    """
    Map the endpoints and point estimate through a strictly increasing g

    Percentile intervals commute with monotone maps, so e.g. g = sqrt turns
    an MSE interval into a root-MSE interval in the response's units.
    """
    lower, upper = float(g(result.lower)), float(g(result.upper))
    if lower > upper:
        raise InvalidArgumentError("transform must be increasing")
    replicates = None if result.replicates is None else [float(g(r)) for r in result.replicates]
    return result.model_copy(
        update={
            "lower": lower,
            "upper": upper,
            "point_estimate": float(g(result.point_estimate)),
            "replicates": replicates,
        }
    )
