"""One-vs-all precision/recall/F-score and macro averages over minority classes.

The designated negative (majority) class is excluded from the macro average;
metrics with a zero denominator are reported as 0, so a class that is never
predicted drags the macro score down rather than vanishing from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .forest import ConfusionMatrix


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    fscore: float


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[int, ClassMetrics]
    macro: ClassMetrics
    negative_class: int

    def format_text(self, class_names: Sequence[str] | None = None) -> str:
        lines = []
        for cid in sorted(self.per_class):
            m = self.per_class[cid]
            name = f" name={class_names[cid]}" if class_names else ""
            lines.append(
                f"class {cid}{name} precision={m.precision:.6f} "
                f"recall={m.recall:.6f} fscore={m.fscore:.6f}"
            )
        lines.append(
            f"macro precision={self.macro.precision:.6f} "
            f"recall={self.macro.recall:.6f} fscore={self.macro.fscore:.6f}"
        )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "negative_class": self.negative_class,
            "per_class": {
                str(cid): {"precision": m.precision, "recall": m.recall, "fscore": m.fscore}
                for cid, m in sorted(self.per_class.items())
            },
            "macro": {
                "precision": self.macro.precision,
                "recall": self.macro.recall,
                "fscore": self.macro.fscore,
            },
        }


def confusion_from_predictions(
    true_labels: Sequence[int], predicted_labels: Sequence[int], num_classes: int
) -> ConfusionMatrix:
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError("true and predicted label lists must have equal length")
    if len(t) < 1:
        raise ValueError("need at least one prediction")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


def _fscore(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def evaluate(m: ConfusionMatrix, negative_class: int) -> EvalReport:
    """One-vs-all metrics for every class except the negative one.

    For class y: TP = c[y][y], FP = other rows predicted y, FN = row y
    predicted elsewhere; precision/recall are 0 when undefined.
    """
    k = m.num_classes
    if k < 2:
        raise ValueError("evaluation needs at least 2 classes")
    if not 0 <= negative_class < k:
        raise ValueError(f"negative_class {negative_class} out of range for K={k}")
    c = m.counts
    col_sums = c.sum(axis=0)
    row_sums = c.sum(axis=1)
    per_class: dict[int, ClassMetrics] = {}
    for y in range(k):
        if y == negative_class:
            continue
        tp = int(c[y, y])
        pred_y = int(col_sums[y])
        true_y = int(row_sums[y])
        precision = tp / pred_y if pred_y > 0 else 0.0
        recall = tp / true_y if true_y > 0 else 0.0
        per_class[y] = ClassMetrics(precision, recall, _fscore(precision, recall))
    macro_p = float(np.mean([m_.precision for m_ in per_class.values()]))
    macro_r = float(np.mean([m_.recall for m_ in per_class.values()]))
    macro_f = float(np.mean([m_.fscore for m_ in per_class.values()]))
    return EvalReport(
        per_class=per_class,
        macro=ClassMetrics(macro_p, macro_r, macro_f),
        negative_class=negative_class,
    )
