"""Forest decision rules: majority voting and Bayesian vote aggregation.

Bayesian aggregation scores each class y as

    log P(y) + sum_t log P(tree_t's vote | y)

with the per-tree conditionals read from that tree's out-of-bag confusion
matrix, smoothed so no single tree can zero out a class. All score
arithmetic stays in the log domain; per-class sums use math.fsum, which is
exactly rounded and therefore invariant to tree order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .forest import ConfusionMatrix, ForestModel


@dataclass(frozen=True)
class EpsilonFloor:
    """Clamp estimated conditionals from below at epsilon."""

    epsilon: float = 1e-5

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class KunchevaExponent:
    """Additive smoothing ((count + 1/K) / (N + 1)) ** b; self-positive."""

    b: float = 0.5

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("b must be positive")


Smoothing = Union[EpsilonFloor, KunchevaExponent]


@dataclass(frozen=True)
class MajorityVoteStrategy:
    pass


@dataclass(frozen=True)
class BtaStrategy:
    smoothing: Smoothing = field(default_factory=EpsilonFloor)


Strategy = Union[MajorityVoteStrategy, BtaStrategy]


@dataclass(frozen=True)
class DecisionScores:
    log_scores: np.ndarray
    decision: int


def majority_vote(votes: Sequence[int], num_classes: int) -> int:
    """Class with the most votes; ties resolve to the lowest class id."""
    votes = np.asarray(votes)
    if len(votes) < 1:
        raise ValueError("need at least one vote")
    return int(np.bincount(votes, minlength=num_classes).argmax())


def smoothed_conditional(
    m: ConfusionMatrix, y: int, predicted: int, cfg: Smoothing
) -> float:
    """Smoothed estimate of P(tree predicts `predicted` | true class y)."""
    if isinstance(cfg, EpsilonFloor):
        return max(float(m.conditional_row(y)[predicted]), cfg.epsilon)
    k = m.num_classes
    total = float(m.counts[y].sum())
    return ((float(m.counts[y][predicted]) + 1.0 / k) / (total + 1.0)) ** cfg.b


def log_smoothed_table(m: ConfusionMatrix, cfg: Smoothing) -> np.ndarray:
    """K x K table of log smoothed conditionals; elementwise identical to
    log(smoothed_conditional(...)) per cell."""
    if isinstance(cfg, EpsilonFloor):
        return np.log(np.maximum(m.conditional(), cfg.epsilon))
    k = m.num_classes
    totals = m.row_totals.astype(np.float64)
    base = (m.counts.astype(np.float64) + 1.0 / k) / (totals[:, None] + 1.0)
    return np.log(base ** cfg.b)


def bta_decide(
    votes: Sequence[int],
    matrices: Sequence[ConfusionMatrix],
    priors: np.ndarray,
    cfg: Smoothing,
) -> DecisionScores:
    """Bayesian aggregation of one vote vector.

    Ties in the final argmax resolve to the lowest class id; because the
    per-class sums are exactly rounded, mathematically equal scores compare
    equal in floating point as well.
    """
    if len(votes) != len(matrices):
        raise ValueError("votes and matrices must have equal length")
    k = len(priors)
    terms = np.empty(len(votes) + 1)
    log_scores = np.empty(k)
    for y in range(k):
        terms[0] = np.log(priors[y])
        for t, (v, m) in enumerate(zip(votes, matrices)):
            terms[t + 1] = np.log(smoothed_conditional(m, y, v, cfg))
        log_scores[y] = math.fsum(terms)
    return DecisionScores(log_scores=log_scores, decision=int(np.argmax(log_scores)))


def collect_votes(model: ForestModel, xdense: np.ndarray) -> np.ndarray:
    """(n_samples, n_trees) matrix of per-tree class votes."""
    rows = np.arange(xdense.shape[0], dtype=np.int64)
    cols = [tree.predict_dense(xdense, rows) for tree in model.trees]
    return np.column_stack(cols)


def majority_vote_all(vote_matrix: np.ndarray, num_classes: int) -> np.ndarray:
    n = vote_matrix.shape[0]
    flat = np.arange(n)[:, None] * num_classes + vote_matrix
    counts = np.bincount(flat.ravel(), minlength=n * num_classes).reshape(n, num_classes)
    return counts.argmax(axis=1).astype(np.int32)


def bta_decide_all(
    vote_matrix: np.ndarray,
    matrices: Sequence[ConfusionMatrix],
    priors: np.ndarray,
    cfg: Smoothing,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch Bayesian aggregation; scores match bta_decide bit for bit."""
    n, n_trees = vote_matrix.shape
    k = len(priors)
    log_priors = np.log(np.asarray(priors, dtype=np.float64))
    tables = np.stack([log_smoothed_table(m, cfg) for m in matrices])
    t_idx = np.arange(n_trees)
    scores = np.empty((n, k))
    terms = np.empty(n_trees + 1)
    for i in range(n):
        picked = tables[t_idx, :, vote_matrix[i]]
        for y in range(k):
            terms[0] = log_priors[y]
            terms[1:] = picked[:, y]
            scores[i, y] = math.fsum(terms)
    decisions = scores.argmax(axis=1).astype(np.int32)
    return decisions, scores


def predict_forest(
    model: ForestModel, entries: list[tuple[int, float]], strategy: Strategy
) -> tuple[int, DecisionScores | None]:
    """Predict one sparse sample; BTA additionally returns its scores."""
    votes = [tree.predict_sample(entries) for tree in model.trees]
    if isinstance(strategy, MajorityVoteStrategy):
        return majority_vote(votes, model.num_classes), None
    scores = bta_decide(votes, model.oob_matrices, model.priors, strategy.smoothing)
    return scores.decision, scores


def predict_dataset(
    model: ForestModel, xdense: np.ndarray, strategy: Strategy
) -> tuple[np.ndarray, np.ndarray | None]:
    """Predict every row of a dense matrix under the chosen strategy.

    The matrix must have at least model.num_features columns (callers pad
    narrower test splits with zeros).
    """
    if xdense.shape[1] < model.num_features:
        raise ValueError(
            f"matrix has {xdense.shape[1]} feature columns, model needs {model.num_features}"
        )
    votes = collect_votes(model, xdense)
    if isinstance(strategy, MajorityVoteStrategy):
        return majority_vote_all(votes, model.num_classes), None
    return bta_decide_all(votes, model.oob_matrices, model.priors, strategy.smoothing)
