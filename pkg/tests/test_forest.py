import logging

import numpy as np
import pytest

from bayesforest import (
    ConfusionMatrix,
    Dataset,
    DegenerateClassError,
    ForestParams,
    bootstrap_sample,
    train_forest,
)


class TestBootstrap:
    def test_single_sample_always_drawn(self):
        bag, oob = bootstrap_sample(1, seed=0)
        assert bag.tolist() == [0]
        assert len(oob) == 0

    def test_partition_property(self):
        for seed in range(20):
            bag, oob = bootstrap_sample(50, seed=seed)
            assert len(bag) == 50
            assert set(bag) | set(oob) == set(range(50))
            assert set(bag) & set(oob) == set()

    def test_oob_fraction_near_one_over_e(self):
        n = 2000
        fracs = [len(bootstrap_sample(n, seed=s)[1]) / n for s in range(50)]
        assert abs(np.mean(fracs) - 0.368) < 0.01

    def test_deterministic(self):
        a = bootstrap_sample(100, seed=5)
        b = bootstrap_sample(100, seed=5)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            bootstrap_sample(0, seed=0)


class TestConfusionMatrix:
    def test_conditional_row_normalizes(self):
        m = ConfusionMatrix(np.array([[8, 2], [1, 9]]))
        assert m.conditional_row(0).tolist() == [0.8, 0.2]

    def test_empty_row_is_uniform(self):
        m = ConfusionMatrix(np.zeros((4, 4), dtype=np.int64))
        assert m.conditional_row(2).tolist() == [0.25] * 4

    def test_zero_count_stays_zero_before_smoothing(self):
        m = ConfusionMatrix(np.array([[0, 10], [3, 3]]))
        assert m.conditional_row(0).tolist() == [0.0, 1.0]

    def test_row_totals(self):
        m = ConfusionMatrix(np.array([[8, 2], [1, 9]]))
        assert m.row_totals.tolist() == [10, 10]

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(np.array([[1, -1], [0, 2]]))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(np.zeros((2, 3), dtype=np.int64))

    def test_duplicating_class_rows_leaves_conditional_unchanged(self):
        # Row-normalization makes the profile independent of how many
        # samples of the class landed in the OOB set.
        base = np.array([[7, 2, 1], [3, 3, 0], [1, 1, 8]])
        for d in (2, 3, 10):
            scaled = base.copy()
            scaled[1] *= d
            a = ConfusionMatrix(base).conditional_row(1)
            b = ConfusionMatrix(scaled).conditional_row(1)
            assert np.array_equal(a, b)


class TestTrainForest:
    def test_single_tree_bookkeeping(self, blob_train):
        model = train_forest(blob_train, ForestParams(num_trees=1, seed=0))
        assert model.num_trees == 1
        total = int(model.oob_matrices[0].counts.sum())
        _, oob = _tree_bag_oob(blob_train.n_samples, model.params.seed, 0)
        assert total == len(oob)

    def test_deterministic_across_runs_and_jobs(self, blob_train):
        p = ForestParams(num_trees=8, seed=42)
        a = train_forest(blob_train, p, n_jobs=1)
        b = train_forest(blob_train, p, n_jobs=3)
        assert all(x == y for x, y in zip(a.trees, b.trees))
        assert all(x == y for x, y in zip(a.oob_matrices, b.oob_matrices))
        assert np.array_equal(a.priors, b.priors)

    def test_row_stochastic_conditionals(self, blob_train):
        model = train_forest(blob_train, ForestParams(num_trees=5, seed=1))
        for m in model.oob_matrices:
            for y in range(m.num_classes):
                assert abs(m.conditional_row(y).sum() - 1.0) < 1e-12

    def test_oob_rows_bounded_by_class_counts(self, blob_train):
        model = train_forest(blob_train, ForestParams(num_trees=5, seed=2))
        counts = blob_train.label_counts()
        for m in model.oob_matrices:
            assert (m.row_totals <= counts).all()

    def test_per_class_oob_fraction(self, blob_train):
        # Each class's OOB row total concentrates near 0.368 * class size.
        model = train_forest(blob_train, ForestParams(num_trees=40, seed=3))
        counts = blob_train.label_counts()
        fractions = np.mean([m.row_totals / counts for m in model.oob_matrices], axis=0)
        assert np.allclose(fractions, 0.368, atol=0.02)

    def test_degenerate_class_propagates(self):
        ds = Dataset.from_rows(
            [[(1, 0.0)], [(1, 1.0)]], ["1", "2"], label_dict={"1": 0, "2": 1, "3": 2}
        )
        with pytest.raises(DegenerateClassError):
            train_forest(ds, ForestParams(num_trees=1))

    def test_single_class_rejected(self):
        ds = Dataset.from_rows([[(1, 0.0)], [(1, 1.0)]], ["1", "1"])
        with pytest.raises(ValueError):
            train_forest(ds, ForestParams(num_trees=1))

    def test_empty_oob_warns_and_uses_uniform_rows(self, caplog):
        ds = Dataset.from_rows([[(1, 0.0)], [(1, 1.0)]], ["1", "2"])
        found = False
        for seed in range(60):
            caplog.clear()
            with caplog.at_level(logging.WARNING, logger="bayesforest.forest"):
                model = train_forest(ds, ForestParams(num_trees=1, seed=seed))
            if any("empty out-of-bag" in r.message for r in caplog.records):
                found = True
                m = model.oob_matrices[0]
                assert m.counts.sum() == 0
                assert m.conditional_row(0).tolist() == [0.5, 0.5]
                break
        assert found, "no seed produced an empty OOB set for n=2 in 60 tries"

    def test_params_resolved_in_model(self, blob_train):
        model = train_forest(blob_train, ForestParams(num_trees=1, seed=0))
        assert model.params.tree_params.features_per_node == 2  # floor(sqrt(4))

    def test_invalid_num_trees(self):
        with pytest.raises(ValueError):
            ForestParams(num_trees=0)


def _tree_bag_oob(n, seed, t):
    from bayesforest import _kernels

    state = np.uint64(_kernels.derive_stream(_kernels.seed_state(seed), np.uint64(t)))
    bag, oob, _ = _kernels.bootstrap_fill(n, state)
    return bag, oob


def test_tree_bag_disjoint_from_oob(blob_train):
    for t in range(5):
        bag, oob = _tree_bag_oob(blob_train.n_samples, 42, t)
        assert set(bag) & set(oob) == set()
