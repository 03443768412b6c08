"""Forest training: bootstrap bagging, per-tree OOB confusion matrices, priors.

Each tree draws from its own PRNG stream derived from (seed, tree index),
so the trained model is identical for any degree of parallelism. Confusion
matrices hold raw integer counts; normalization and smoothing happen at
prediction time, letting one model serve every aggregation variant.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import Dataset, class_priors
from .tree import Tree, TreeParams, grow_on_dense

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForestParams:
    num_trees: int = 100
    tree_params: TreeParams = field(default_factory=TreeParams)
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts; row = true class, column = predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (c < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        object.__setattr__(self, "counts", c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def conditional_row(self, y: int) -> np.ndarray:
        """P(predicted | true=y); the uniform vector when class y has no counts."""
        row = self.counts[y]
        total = row.sum()
        if total == 0:
            k = self.num_classes
            return np.full(k, 1.0 / k)
        return row / total

    def conditional(self) -> np.ndarray:
        """Row-normalized view of the whole matrix (uniform rows where empty)."""
        return np.vstack([self.conditional_row(y) for y in range(self.num_classes)])


def bootstrap_sample(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """n uniform draws with replacement from [0, n) and the out-of-bag rest."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bag, oob, _ = _kernels.bootstrap_fill(n, _kernels.seed_state(seed))
    return bag, oob


@dataclass
class ForestModel:
    trees: list[Tree]
    oob_matrices: list[ConfusionMatrix]
    priors: np.ndarray
    label_dict: dict[str, int]
    class_names: tuple[str, ...]
    params: ForestParams
    num_features: int

    def __post_init__(self):
        if len(self.trees) != len(self.oob_matrices):
            raise ValueError("trees and oob_matrices must pair up one-to-one")
        k = self.num_classes
        for m in self.oob_matrices:
            if m.num_classes != k:
                raise ValueError("confusion matrix size does not match the class count")
        if len(self.priors) != k or len(self.class_names) != k:
            raise ValueError("priors/class_names length must equal the class count")

    @property
    def num_trees(self) -> int:
        return len(self.trees)

    @property
    def num_classes(self) -> int:
        return max(self.label_dict.values()) + 1


def _train_one(xdense, ydata, n_classes, tree_params, seed, t):
    state = np.uint64(_kernels.derive_stream(_kernels.seed_state(seed), np.uint64(t)))
    bag, oob, state = _kernels.bootstrap_fill(xdense.shape[0], state)
    tree, _ = grow_on_dense(xdense, ydata, bag, n_classes, tree_params, state)
    if len(oob) == 0:
        logger.warning("tree %d has an empty out-of-bag set; its error profile is uninformative", t)
    counts = _kernels.oob_confusion(
        tree.feature, tree.threshold, tree.left, tree.right, tree.leaf_class,
        xdense, ydata, oob, n_classes,
    )
    return tree, ConfusionMatrix(counts)


def train_forest(ds: Dataset, params: ForestParams, n_jobs: int = 1) -> ForestModel:
    """Train T bagged trees and estimate each one's OOB confusion matrix.

    The result is bit-identical for any n_jobs. Raises DegenerateClassError
    when some dictionary class has no samples, ValueError for single-class
    data.
    """
    priors = class_priors(ds)
    k = ds.num_classes
    if k < 2:
        raise ValueError("forest training needs at least 2 classes")
    xdense = ds.to_dense()
    ydata = np.ascontiguousarray(ds.labels, dtype=np.int32)
    resolved = TreeParams(
        min_samples_split=params.tree_params.min_samples_split,
        features_per_node=params.tree_params.resolve_features(ds.num_features),
        max_depth=params.tree_params.max_depth,
    )

    t_range = range(params.num_trees)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(
                pool.map(lambda t: _train_one(xdense, ydata, k, resolved, params.seed, t), t_range)
            )
    else:
        results = [_train_one(xdense, ydata, k, resolved, params.seed, t) for t in t_range]

    trees = [r[0] for r in results]
    matrices = [r[1] for r in results]
    return ForestModel(
        trees=trees,
        oob_matrices=matrices,
        priors=priors,
        label_dict=dict(ds.label_dict),
        class_names=ds.class_names,
        params=ForestParams(num_trees=params.num_trees, tree_params=resolved, seed=params.seed),
        num_features=ds.num_features,
    )
