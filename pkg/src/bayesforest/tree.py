"""CART decision trees with per-node random feature subsampling.

Trees are stored as flat preorder node arrays (the same layout the model
file uses). Node feature indices are 1-based, matching the dataset
convention; -1 marks a leaf. Samples route left when value <= threshold,
with absent sparse entries reading as 0.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import Dataset


@dataclass(frozen=True)
class TreeParams:
    """Growth controls.

    features_per_node None means floor(sqrt(M)), clamped to at least 1.
    max_depth None means unlimited.
    """

    min_samples_split: int = 2
    features_per_node: int | None = None
    max_depth: int | None = None

    def __post_init__(self):
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.features_per_node is not None and self.features_per_node < 1:
            raise ValueError("features_per_node must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 (or None for unlimited)")

    def resolve_features(self, num_features: int) -> int:
        if self.features_per_node is None:
            return max(1, math.isqrt(num_features))
        return min(self.features_per_node, num_features)


@dataclass(frozen=True)
class Tree:
    """Flat binary tree; row i is Internal(feature, threshold, left, right)
    when feature[i] >= 1, else Leaf(leaf_class[i])."""

    feature: np.ndarray  # int32, 1-based; -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32 child node index
    right: np.ndarray  # int32
    leaf_class: np.ndarray  # int32; -1 for internal nodes

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return (
            np.array_equal(self.feature, other.feature)
            and np.array_equal(self.threshold, other.threshold)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.leaf_class, other.leaf_class)
        )

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 1).sum())

    def is_leaf(self, node: int = 0) -> bool:
        return self.feature[node] < 1

    def predict_sample(self, entries: list[tuple[int, float]]) -> int:
        """Predict from sparse (1-based feature index, value) pairs."""
        x = dict(entries)
        node = 0
        while self.feature[node] >= 1:
            v = x.get(int(self.feature[node]), 0.0)
            node = int(self.left[node]) if v <= self.threshold[node] else int(self.right[node])
        return int(self.leaf_class[node])

    def predict_dense(self, xdense: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
        xdense = np.ascontiguousarray(xdense, dtype=np.float64)
        if rows is None:
            rows = np.arange(xdense.shape[0], dtype=np.int64)
        return _kernels.predict_rows(
            self.feature, self.threshold, self.left, self.right, self.leaf_class, xdense, rows
        )

    def validate(self, num_features: int, num_classes: int) -> None:
        """Check structural invariants; raises ValueError on violation."""
        nn = self.n_nodes
        if nn < 1:
            raise ValueError("tree has no nodes")
        for i in range(nn):
            if self.feature[i] >= 1:
                if not 1 <= self.feature[i] <= num_features:
                    raise ValueError(f"node {i}: feature index {self.feature[i]} out of [1, {num_features}]")
                if not (0 <= self.left[i] < nn and 0 <= self.right[i] < nn):
                    raise ValueError(f"node {i}: child index out of range")
                if self.left[i] <= i or self.right[i] <= i:
                    raise ValueError(f"node {i}: children must come after the node in preorder")
            else:
                if not 0 <= self.leaf_class[i] < num_classes:
                    raise ValueError(f"node {i}: leaf class {self.leaf_class[i]} out of range")


def grow_on_dense(
    xdense: np.ndarray,
    ydata: np.ndarray,
    rows: np.ndarray,
    n_classes: int,
    params: TreeParams,
    stream_state: np.uint64,
) -> tuple[Tree, np.uint64]:
    """Grow a tree from an explicit PRNG stream state; engine entry point."""
    if len(rows) == 0:
        raise ValueError("cannot grow a tree on an empty row set")
    max_depth = -1 if params.max_depth is None else params.max_depth
    feat, thr, left, right, leaf, state = _kernels.grow_tree(
        xdense,
        ydata,
        np.asarray(rows, dtype=np.int64),
        n_classes,
        params.min_samples_split,
        params.resolve_features(xdense.shape[1]),
        max_depth,
        np.uint64(stream_state),
    )
    return Tree(feat, thr, left, right, leaf), state


def train_tree(ds: Dataset, row_indices: list[int] | np.ndarray, params: TreeParams, seed: int) -> Tree:
    """Train a single tree on the given dataset rows, deterministically per seed."""
    tree, _ = grow_on_dense(
        ds.to_dense(),
        ds.labels,
        np.asarray(row_indices, dtype=np.int64),
        ds.num_classes,
        params,
        np.uint64(_kernels.derive_stream(_kernels.seed_state(seed), np.uint64(0))),
    )
    return tree


def gini_impurity(labels: list[int] | np.ndarray) -> float:
    """1 - sum of squared class proportions."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        return 0.0
    _, counts = np.unique(labels, return_counts=True)
    p = counts / len(labels)
    return float(1.0 - np.sum(p * p))
