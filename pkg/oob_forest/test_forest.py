"""
Tests for the forest package: bootstrap bookkeeping, split search, tree
growth, aggregation and model files
"""

import json

import numpy as np
import pytest

from oob_forest.dataset import ColumnMeta, Dataset
from oob_forest.datagen import gen_friedman, gen_spheres
from oob_forest.errors import EmptySubforestError, InvalidArgumentError, ModelFileError
from oob_forest.forest import (
    Forest,
    Tree,
    best_split,
    bootstrap_indices,
    in_bag_error,
    load_forest,
    oob_fraction,
    predict_forest,
    predict_forest_batch,
    predict_tree,
    predict_tree_batch,
    save_forest,
    train_forest,
    train_tree,
)
from oob_forest.forest.rng import TREE_STREAM, derive_stream
from oob_forest.forest.splits import node_impurity
from oob_forest.models import TreeParams
from oob_forest.oobci import build_augmented, oob_estimate, per_observation_errors


def _regression(x, y):
    return Dataset(features=np.asarray(x, dtype=float).reshape(len(x), -1), response=y, task="regression")


def _leaf(value, task="regression", n_features=1):
    return Tree(
        feature=np.array([-1]),
        threshold=np.array([np.nan]),
        left=np.array([-1]),
        right=np.array([-1]),
        value=np.array([value], dtype=float),
        default_left=np.array([True]),
        task=task,
        n_features=n_features,
    )


def _stump(threshold=0.5, low=0.0, high=1.0):
    return Tree(
        feature=np.array([0, -1, -1]),
        threshold=np.array([threshold, np.nan, np.nan]),
        left=np.array([1, -1, -1]),
        right=np.array([2, -1, -1]),
        value=np.array([np.nan, low, high]),
        default_left=np.array([True, True, True]),
        task="regression",
        n_features=1,
    )


def _forest_of(trees, task="regression", n_classes=0):
    return Forest(
        trees=trees,
        inbag=np.ones((len(trees), 2), dtype=np.int32),
        task=task,
        master_seed=0,
        params=TreeParams(),
        n_classes=n_classes,
        columns=[ColumnMeta(name="x1")],
    )


# --- bootstrap_indices ------------------------------------------------------

def test_bootstrap_single_observation():
    sample = bootstrap_indices(1, derive_stream(3))
    assert sample.indices.tolist() == [0]
    assert sample.counts.tolist() == [1]


def test_bootstrap_rejects_empty():
    with pytest.raises(InvalidArgumentError):
        bootstrap_indices(0, derive_stream(3))


def test_bootstrap_is_deterministic():
    a = bootstrap_indices(50, derive_stream(11, 0, 4))
    b = bootstrap_indices(50, derive_stream(11, 0, 4))
    np.testing.assert_array_equal(a.indices, b.indices)
    assert a.counts.sum() == 50


def test_oob_fraction_near_one_over_e():
    n, B = 500, 1000
    zero = np.array([
        bootstrap_indices(n, derive_stream(2024, 0, j)).counts == 0 for j in range(B)
    ])
    fraction = zero.mean()
    assert 0.362 <= fraction <= 0.373
    assert abs(fraction - (1 - 1 / n) ** n) < 0.01


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_forest_oob_fraction_on_friedman(seed):
    forest = train_forest(gen_friedman(500, seed=seed), 1000, master_seed=seed)
    assert 0.362 <= oob_fraction(forest) <= 0.373


# --- best_split -------------------------------------------------------------

def test_best_split_separable_regression():
    data = _regression([1, 2, 3, 4], [0, 0, 10, 10])
    split = best_split(np.arange(4), 0, data)
    assert split.threshold == pytest.approx(2.5)
    # total sum of squares 100 drops to 0
    assert split.decrease == pytest.approx(100.0)
    assert split.decrease == pytest.approx(node_impurity(data.response, np.ones(4), "regression"))


def test_best_split_constant_feature():
    data = _regression([1, 1, 1, 1], [0, 3, 10, 7])
    assert best_split(np.arange(4), 0, data) is None


def test_best_split_pure_classification_children():
    data = Dataset(features=np.array([[1.0], [1.0], [2.0], [2.0]]), response=[1, 1, 2, 2], task="classification")
    split = best_split(np.arange(4), 0, data)
    assert split.threshold == pytest.approx(1.5)
    # parent Gini mass 4 * 0.5 = 2, both children pure
    assert split.decrease == pytest.approx(2.0)


def test_best_split_weights_count_multiplicity():
    data = _regression([1, 2, 3], [0, 10, 10])
    split = best_split(np.arange(3), 0, data, weights=np.array([3.0, 0.5, 0.5]))
    assert split.left_weight == pytest.approx(3.0)
    assert split.right_weight == pytest.approx(1.0)


def test_best_split_categorical_groups_levels():
    codes = np.array([0, 1, 2, 0, 1, 2], dtype=float)
    y = np.array([0.0, 10.0, 0.0, 0.0, 10.0, 0.0])
    data = Dataset(
        features=codes.reshape(-1, 1),
        response=y,
        task="regression",
        columns=[ColumnMeta(name="c", kind="categorical", levels=("a", "b", "c"))],
    )
    split = best_split(np.arange(6), 0, data)
    assert split.is_categorical
    assert {frozenset(split.left_levels), frozenset(split.right_levels)} == {frozenset({1}), frozenset({0, 2})}


# --- train_tree / predict_tree ----------------------------------------------

def test_constant_response_gives_single_leaf():
    data = _regression(np.linspace(0, 1, 20), np.full(20, 4.5))
    tree = train_tree(data, np.ones(20, dtype=int), TreeParams(), derive_stream(1))
    assert tree.n_nodes == 1
    assert predict_tree(tree, np.array([0.3])) == 4.5


def test_min_node_size_n_forces_root_leaf():
    rng = np.random.default_rng(0)
    x = rng.random((30, 2))
    y = rng.random(30)
    data = _regression(x, y)
    counts = np.bincount(rng.integers(0, 30, 30), minlength=30)
    tree = train_tree(data, counts, TreeParams(min_node_size=30), derive_stream(1))
    assert tree.n_nodes == 1
    assert tree.value[0] == pytest.approx(np.dot(counts, y) / 30)


def test_step_function_recovered_with_full_mtry():
    rng = np.random.default_rng(5)
    x = rng.random((100, 2))
    y = (x[:, 0] > 0.5).astype(float)
    data = _regression(x, y)
    tree = train_tree(data, np.ones(100, dtype=int), TreeParams(mtry=2, min_node_size=1), derive_stream(2))
    np.testing.assert_array_equal(predict_tree_batch(tree, x), y)
    assert tree.n_leaves == tree.n_nodes - (tree.n_nodes - 1) // 2


def test_train_tree_checks_multiplicities():
    data = _regression([1, 2, 3, 4], [0, 0, 10, 10])
    with pytest.raises(InvalidArgumentError):
        train_tree(data, np.array([1, 1, 1, 0]), TreeParams(), derive_stream(0))


def test_tree_stream_from_params_seed():
    data = gen_friedman(120, seed=2)
    ones = np.ones(120, dtype=int)
    params = TreeParams(mtry=1, seed=4)
    implicit = train_tree(data, ones, params)
    explicit = train_tree(data, ones, params, derive_stream(4, TREE_STREAM))
    np.testing.assert_array_equal(implicit.feature, explicit.feature)
    np.testing.assert_array_equal(implicit.threshold, explicit.threshold)
    np.testing.assert_array_equal(train_tree(data, ones, params).value, implicit.value)


def test_max_depth_caps_tree():
    data = gen_friedman(200, seed=1)
    tree = train_tree(data, np.ones(200, dtype=int), TreeParams(max_depth=3), derive_stream(0))
    assert tree.depth <= 3


def test_predict_tree_threshold_is_inclusive():
    tree = _stump()
    assert predict_tree(tree, np.array([0.3])) == 0.0
    assert predict_tree(tree, np.array([0.5])) == 0.0
    assert predict_tree(tree, np.array([0.7])) == 1.0
    np.testing.assert_array_equal(predict_tree_batch(tree, np.array([[0.3], [0.5], [0.7]])), [0.0, 0.0, 1.0])


def test_predict_tree_schema_mismatch():
    with pytest.raises(InvalidArgumentError):
        predict_tree(_stump(), np.array([0.3, 0.1]))


def test_unseen_level_routes_to_heavier_child():
    codes = np.array([0, 0, 0, 1, 1, 2, 2, 2, 2], dtype=float)
    y = np.array([1, 1, 1, 2, 2, 1, 1, 1, 1])
    data = Dataset(
        features=codes.reshape(-1, 1),
        response=y,
        task="classification",
        columns=[ColumnMeta(name="c", kind="categorical", levels=("a", "b", "c", "d"))],
    )
    # level "d" (id 3) never reaches the root; the larger child predicts 1
    tree = train_tree(data, np.ones(9, dtype=int), TreeParams(mtry=1), derive_stream(0))
    assert predict_tree(tree, np.array([3.0])) == 1.0
    assert predict_tree_batch(tree, np.array([[3.0], [1.0]])).tolist() == [1.0, 2.0]


# --- forest -----------------------------------------------------------------

def test_forest_mean_of_trees():
    forest = _forest_of([_leaf(1.0), _leaf(3.0)])
    assert predict_forest(forest, np.array([0.0])) == 2.0


def test_forest_majority_vote_and_tie():
    votes = _forest_of([_leaf(1, "classification"), _leaf(1, "classification"), _leaf(2, "classification")],
                       task="classification", n_classes=2)
    assert predict_forest(votes, np.array([0.0])) == 1.0
    assert predict_forest(votes, np.array([0.0]), trees=[1, 2]) == 1.0
    assert predict_forest(votes, np.array([0.0]), trees=[2]) == 2.0


def test_forest_empty_subset():
    forest = _forest_of([_leaf(1.0)])
    with pytest.raises(EmptySubforestError):
        predict_forest(forest, np.array([0.0]), trees=[])


def test_train_forest_rejects_zero_trees():
    with pytest.raises(InvalidArgumentError):
        train_forest(gen_friedman(20, seed=1), 0)


def test_inbag_columns_sum_to_n():
    data = gen_friedman(60, seed=3)
    forest = train_forest(data, 25, master_seed=9)
    assert forest.inbag.shape == (25, 60)
    assert (forest.inbag.sum(axis=1) == 60).all()


def test_single_tree_oob_sets():
    data = gen_friedman(40, seed=3)
    forest = train_forest(data, 1, master_seed=2)
    aug = build_augmented(forest, data)
    for i, members in enumerate(aug.oob_sets):
        expected = [0] if forest.inbag[0, i] == 0 else []
        assert members.tolist() == expected


def test_thread_count_does_not_change_forest():
    data = gen_friedman(80, seed=4)
    one = train_forest(data, 16, master_seed=77, threads=1)
    many = train_forest(data, 16, master_seed=77, threads=8)
    np.testing.assert_array_equal(one.inbag, many.inbag)
    for a, b in zip(one.trees, many.trees):
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.threshold, b.threshold)
        np.testing.assert_array_equal(a.value, b.value)


def test_batch_prediction_matches_mean_of_trees():
    data = gen_friedman(100, seed=5)
    forest = train_forest(data, 10, master_seed=1)
    X = gen_friedman(20, seed=6).features
    per_tree = np.array([predict_tree_batch(t, X) for t in forest.trees])
    np.testing.assert_allclose(predict_forest_batch(forest, X), per_tree.mean(axis=0), rtol=1e-9)
    assert predict_forest(forest, X[0]) == pytest.approx(per_tree[:, 0].mean(), rel=1e-9)


def test_in_bag_error_below_oob_error():
    data = gen_friedman(200, seed=8)
    forest = train_forest(data, 100, master_seed=8)
    oob = oob_estimate(per_observation_errors(build_augmented(forest, data), data))
    assert in_bag_error(forest, data) <= oob
    assert 0.3 < oob_fraction(forest) < 0.43


def test_classification_forest_on_spheres():
    data = gen_spheres(200, seed=2)
    forest = train_forest(data, 30, master_seed=5)
    assert forest.params.mtry == 4
    assert forest.params.min_node_size == 1
    predictions = predict_forest_batch(forest, data.features)
    assert set(np.unique(predictions)) <= {1.0, 2.0}


# --- model files ------------------------------------------------------------

def test_model_file_restores_forest_and_data(tmp_path):
    data = gen_spheres(80, seed=1)
    forest = train_forest(data, 12, master_seed=3)
    path = save_forest(forest, str(tmp_path / "model.json.gz"), data)

    loaded, stored = load_forest(path)
    assert loaded.n_trees == 12
    np.testing.assert_array_equal(loaded.inbag, forest.inbag)
    np.testing.assert_array_equal(predict_forest_batch(loaded, data.features), predict_forest_batch(forest, data.features))
    np.testing.assert_array_equal(stored.features, data.features)
    np.testing.assert_array_equal(stored.response, data.response)


def test_model_file_wrong_version(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"format": "oob-forest-model", "version": 99}))
    with pytest.raises(ModelFileError):
        load_forest(str(path))


def test_model_file_missing():
    with pytest.raises(FileNotFoundError):
        load_forest("/nonexistent/model.json")
