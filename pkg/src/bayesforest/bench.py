"""Repeated train/evaluate protocol with mean and sample-std reporting.

One forest is trained per repeat (seed = seed_base + repeat) and every
strategy aggregates the same collected votes, so strategy comparisons are
isolated to the decision rule. Rerunning with the same seeds reproduces
the table exactly, whether repeats run sequentially or in parallel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .aggregation import (
    BtaStrategy,
    MajorityVoteStrategy,
    Strategy,
    bta_decide_all,
    collect_votes,
    majority_vote_all,
)
from .dataset import Dataset
from .forest import ForestParams, train_forest
from .metrics import confusion_from_predictions, evaluate
from .tree import TreeParams


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float


@dataclass
class StrategySummary:
    name: str
    precision: MetricSummary
    recall: MetricSummary
    fscore: MetricSummary
    per_repeat: list[tuple[float, float, float]]


@dataclass
class BenchReport:
    repeats: int
    num_trees: int
    num_classes: int
    negative_class: int
    strategies: list[StrategySummary]

    def format_table(self) -> str:
        name_w = max(8, max(len(s.name) for s in self.strategies))
        header = f"{'strategy':<{name_w}}  {'precision':>19}  {'recall':>19}  {'f-score':>19}"
        lines = [header, "-" * len(header)]
        for s in self.strategies:
            cells = [
                f"{m.mean:.4f} ± {m.std:.4f}" for m in (s.precision, s.recall, s.fscore)
            ]
            lines.append(
                f"{s.name:<{name_w}}  {cells[0]:>19}  {cells[1]:>19}  {cells[2]:>19}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "repeats": self.repeats,
            "num_trees": self.num_trees,
            "num_classes": self.num_classes,
            "negative_class": self.negative_class,
            "strategies": [
                {
                    "name": s.name,
                    "precision": {"mean": s.precision.mean, "std": s.precision.std},
                    "recall": {"mean": s.recall.mean, "std": s.recall.std},
                    "fscore": {"mean": s.fscore.mean, "std": s.fscore.std},
                    "per_repeat": [
                        {"precision": p, "recall": r, "fscore": f}
                        for p, r, f in s.per_repeat
                    ],
                }
                for s in self.strategies
            ],
        }


def _summary(values: list[float]) -> MetricSummary:
    arr = np.asarray(values)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return MetricSummary(mean=float(arr.mean()), std=std)


def run_bench(
    train_ds: Dataset,
    test_ds: Dataset,
    strategies: list[tuple[str, Strategy]],
    repeats: int = 10,
    num_trees: int = 100,
    tree_params: TreeParams | None = None,
    seed_base: int = 0,
    n_jobs: int = 1,
    negative_class: int | None = None,
    parallel_repeats: bool = False,
) -> BenchReport:
    """Run the repeated protocol; negative_class None means the class with
    the largest training prevalence (ties to the lowest id)."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if not strategies:
        raise ValueError("need at least one strategy")
    k = train_ds.num_classes
    if test_ds.labels.max() >= k:
        raise ValueError("test split contains class ids unknown to the training split")
    tree_params = tree_params or TreeParams()

    xtest = test_ds.to_dense()
    if xtest.shape[1] < train_ds.num_features:
        pad = np.zeros((xtest.shape[0], train_ds.num_features - xtest.shape[1]))
        xtest = np.hstack([xtest, pad])

    if negative_class is None:
        negative_class = int(np.argmax(train_ds.label_counts()))

    def one_repeat(r: int) -> list[tuple[float, float, float]]:
        params = ForestParams(num_trees=num_trees, tree_params=tree_params, seed=seed_base + r)
        model = train_forest(train_ds, params, n_jobs=n_jobs)
        votes = collect_votes(model, xtest)
        triples = []
        for _, strategy in strategies:
            if isinstance(strategy, MajorityVoteStrategy):
                decisions = majority_vote_all(votes, k)
            elif isinstance(strategy, BtaStrategy):
                decisions, _ = bta_decide_all(votes, model.oob_matrices, model.priors, strategy.smoothing)
            else:
                raise ValueError(f"unknown strategy object: {strategy!r}")
            report = evaluate(
                confusion_from_predictions(test_ds.labels, decisions, k), negative_class
            )
            triples.append((report.macro.precision, report.macro.recall, report.macro.fscore))
        return triples

    if parallel_repeats and repeats > 1:
        with ThreadPoolExecutor(max_workers=min(repeats, 4)) as pool:
            per_repeat = list(pool.map(one_repeat, range(repeats)))
    else:
        per_repeat = [one_repeat(r) for r in range(repeats)]

    collected = {
        name: [per_repeat[r][i] for r in range(repeats)]
        for i, (name, _) in enumerate(strategies)
    }
    summaries = [
        StrategySummary(
            name=name,
            precision=_summary([t[0] for t in collected[name]]),
            recall=_summary([t[1] for t in collected[name]]),
            fscore=_summary([t[2] for t in collected[name]]),
            per_repeat=collected[name],
        )
        for name, _ in strategies
    ]
    return BenchReport(
        repeats=repeats,
        num_trees=num_trees,
        num_classes=k,
        negative_class=negative_class,
        strategies=summaries,
    )
