import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from drivestress.dataset import EXPANDED_NAMES, BinaryLabel, ExpandedSample
from drivestress.errors import ArityMismatch, EmptyNode, MalformedFile, SingleClassTrainingSet
from drivestress.forest import (
    ForestConfig,
    ForestModel,
    Leaf,
    Split,
    best_split,
    dumps,
    fit_arrays,
    fit_forest,
    gini,
    grow_tree,
    iter_nodes,
    loads,
    tree_depth,
    tree_rng,
)


class TestGini:
    def test_examples(self):
        assert gini([10, 0]) == 0.0
        assert gini([5, 5]) == 0.5
        assert gini([3, 1]) == 0.375

    def test_empty(self):
        with pytest.raises(EmptyNode):
            gini([0, 0])

    @given(st.lists(st.integers(0, 10_000), min_size=2, max_size=2).filter(lambda c: sum(c) > 0))
    def test_exact(self, counts):
        g = gini(counts)
        assert 0.0 <= g <= 0.5
        assert abs(g - float(oracles.gini_exact(counts))) <= 2e-16
        assert g == oracles.gini_float(counts)


class TestBestSplit:
    def test_example(self):
        f, t, d = best_split(np.array([[1.0], [2.0], [9.0], [10.0]]), [0, 0, 1, 1], [0])
        assert (f, t, d) == (0, 5.5, 0.5)

    def test_identical_labels(self):
        assert best_split(np.random.default_rng(0).normal(size=(6, 3)), [1] * 6, [0, 1, 2]) is None

    def test_identical_values(self):
        assert best_split(np.ones((6, 3)), [0, 1, 0, 1, 0, 1], [0, 1, 2]) is None

    def test_tie_prefers_lower_feature_then_threshold(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = [0, 1, 0, 1]
        f, t, d = best_split(X, y, [1, 0])
        assert f == 0
        want = oracles.best_split_exhaustive(X, y, [0, 1])
        assert (f, t, d) == want

    def test_midpoint_rounding(self):
        a = 1.0
        b = np.nextafter(a, 2.0)
        f, t, d = best_split(np.array([[a], [b]]), [0, 1], [0])
        assert t == a and d == 0.5

    @pytest.mark.parametrize("seed", range(400))
    def test_exhaustive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 21))
        X = rng.integers(0, 5, size=(n, 5)).astype(float)
        if seed % 3 == 0:
            X = rng.normal(size=(n, 5))
        elif seed % 3 == 1:
            X *= 0.1  # inexact midpoints
        y = rng.integers(0, 2, size=n)
        cand = sorted(rng.choice(5, size=int(rng.integers(1, 6)), replace=False).tolist())
        assert best_split(X, y, cand) == oracles.best_split_exhaustive(X, y, cand)


def _planted(n=30, d=12, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, d))
    X[:, 3] += 6.0 * y
    return X, y


class TestGrow:
    def test_separable(self):
        X, y = _planted()
        tree = grow_tree(X, y, ForestConfig(features_per_split=12), tree_rng(0, 0))
        assert all(tree_leaf_majority(tree, x) == c for x, c in zip(X, y))

    def test_single_sample(self):
        assert grow_tree(np.zeros((1, 4)), [1], ForestConfig(), tree_rng(0, 0)) == Leaf((0, 1))

    def test_stump(self):
        X, y = _planted()
        tree = grow_tree(X, y, ForestConfig(max_depth=1, features_per_split=12), tree_rng(0, 0))
        assert tree_depth(tree) == 1
        assert sum(isinstance(n, Split) for n in iter_nodes(tree)) == 1

    @pytest.mark.parametrize("depth", [1, 2, 3, 5])
    def test_depth_bound(self, depth):
        rng = np.random.default_rng(depth)
        X, y = rng.normal(size=(60, 8)), rng.integers(0, 2, size=60)
        tree = grow_tree(X, y, ForestConfig(max_depth=depth), tree_rng(1, 0))
        assert tree_depth(tree) <= depth

    def test_leaf_counts_sum_to_samples(self):
        rng = np.random.default_rng(9)
        X, y = rng.normal(size=(40, 6)), rng.integers(0, 2, size=40)
        tree = grow_tree(X, y, ForestConfig(), tree_rng(1, 0))
        assert sum(sum(n.class_counts) for n in iter_nodes(tree) if isinstance(n, Leaf)) == 40


def tree_leaf_majority(tree, x):
    while isinstance(tree, Split):
        tree = tree.left if x[tree.feature_index] <= tree.threshold else tree.right
    return tree.majority


def _samples(X, y, drives=("a",)):
    out = []
    for i, (x, c) in enumerate(zip(X, y)):
        values = np.zeros(252)
        values[: len(x)] = x
        out.append(ExpandedSample(drives[i % len(drives)], i, values, BinaryLabel(int(c))))
    return out


class TestFit:
    def test_determinism(self):
        X, y = _planted()
        train = _samples(X, y)
        a = dumps(fit_forest(train, ForestConfig(n_trees=15, rng_seed=7)))
        b = dumps(fit_forest(train, ForestConfig(n_trees=15, rng_seed=7)))
        assert a == b
        assert a != dumps(fit_forest(train, ForestConfig(n_trees=15, rng_seed=8)))

    def test_permutation_invariance(self):
        X, y = _planted(seed=4)
        train = _samples(X, y, drives=("a", "b", "c"))
        perm = [train[i] for i in np.random.default_rng(1).permutation(len(train))]
        cfg = ForestConfig(n_trees=10, rng_seed=3)
        assert dumps(fit_forest(train, cfg)) == dumps(fit_forest(perm, cfg))

    def test_planted_training_accuracy(self):
        rng = np.random.default_rng(0)
        y = np.arange(30) % 2
        X = rng.normal(size=(30, 252)) + 6.0 * y[:, None]  # class margin in every feature
        train = _samples(X, y)
        model = fit_forest(train, ForestConfig(n_trees=25))
        Xs = np.stack([s.values for s in train])
        assert np.array_equal(model.predict_many(Xs), y)
        assert model.feature_names == EXPANDED_NAMES
        assert model.class_order == ("low(=highway)", "high(=city)")

    def test_single_class(self):
        with pytest.raises(SingleClassTrainingSet):
            fit_forest(_samples(np.zeros((4, 3)), [1, 1, 1, 1]), ForestConfig(n_trees=2))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 35), st.integers(0, 2**32 - 1))
    def test_overfit_distinct_rows(self, n, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 20))
        y = rng.integers(0, 2, size=n)
        y[:2] = [0, 1]
        # one tree on the full training set (no bootstrap) must shatter distinct rows
        tree = grow_tree(X, y, ForestConfig(features_per_split=20), tree_rng(seed, 0))
        assert all(tree_leaf_majority(tree, x) == c for x, c in zip(X, y))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 35), st.integers(0, 2**32 - 1), st.booleans())
    def test_forest_overfits_small_sets(self, n, seed, coarse):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 252))
        if coarse:
            X = np.round(X)  # many tied values per column
        X[:, 0] = np.arange(n)  # rows distinct
        y = rng.integers(0, 2, size=n)
        y[:2] = [0, 1]
        model = fit_arrays(X, y, ForestConfig(rng_seed=seed % 1000))
        assert np.array_equal(model.predict_many(X), y)

    def test_audit_max_depth_30(self):
        rng = np.random.default_rng(2)
        X, y = rng.normal(size=(200, 252)), rng.integers(0, 2, size=200)
        model = fit_arrays(X, y, ForestConfig(n_trees=5))
        model.audit()
        assert all(tree_depth(t) <= 30 for t in model.trees)
        assert all(n.feature_index < 252 for t in model.trees for n in iter_nodes(t) if isinstance(n, Split))


def _model(trees, n_features=2):
    return ForestModel(tuple(trees), ForestConfig(n_trees=len(trees)), tuple(f"x{i}" for i in range(n_features)))


class TestPredict:
    def test_unanimous(self):
        m = _model([Split(0, 0.5, Leaf((0, 4)), Leaf((0, 4)))] * 100)
        assert m.predict([0.0, 0.0]) == (1, 1.0)

    def test_fifty_fifty(self):
        m = _model([Leaf((1, 0))] * 50 + [Leaf((0, 1))] * 50)
        assert m.predict([0.0, 0.0]) == (0, 0.5)

    def test_leaf_tie(self):
        assert _model([Leaf((2, 2))]).predict([0.0, 0.0]) == (0, 1.0)

    def test_hand_built_three_trees(self):
        t1 = Split(0, 0.5, Leaf((2, 0)), Leaf((0, 2)))
        t2 = Split(1, 10.0, Split(0, 2.0, Leaf((0, 1)), Leaf((1, 0))), Leaf((1, 0)))
        t3 = Split(1, 0.0, Leaf((3, 1)), Leaf((1, 2)))
        m = _model([t1, t2, t3])
        # x=(1, 5): t1 right -> high; t2 left, 1<=2 -> high; t3 right -> high
        assert m.predict([1.0, 5.0]) == (1, 1.0)
        # x=(3, 5): t1 high; t2 left, 3>2 -> low; t3 high
        assert m.predict([3.0, 5.0]) == (1, pytest.approx(2 / 3))
        # x=(0, -1): t1 low; t2 left, 0<=2 -> high; t3 left -> low
        assert m.predict([0.0, -1.0]) == (0, pytest.approx(2 / 3))
        assert m.votes([0.0, -1.0]).tolist() == [2, 1]

    def test_arity(self):
        with pytest.raises(ArityMismatch):
            _model([Leaf((1, 0))]).predict(np.zeros(3))


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        X, y = rng.normal(size=(50, 252)), rng.integers(0, 2, size=50)
        model = fit_arrays(X, y, ForestConfig(n_trees=6, rng_seed=11), EXPANDED_NAMES)
        text = dumps(model)
        back = loads(text)
        assert back == model
        assert dumps(back) == text
        assert np.array_equal(back.predict_many(X), model.predict_many(X))

    def test_threshold_bits(self):
        thr = 0.1 + 0.2
        m = _model([Split(0, thr, Leaf((1, 0)), Leaf((0, 1)))])
        assert loads(dumps(m)).trees[0].threshold == thr

    def test_bad_format(self):
        with pytest.raises(MalformedFile):
            loads('{"format": "other", "version": 1}')
