"""Dataset container, class-label dictionary, priors, and class merging.

Samples are stored sparsely (CSR-style arrays) with 1-based feature indices,
matching the LibSVM convention; absent indices mean 0.0. Datasets are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateClassError


def build_label_dict(raw_labels: list[str]) -> dict[str, int]:
    """Assign class ids 0..K-1 to the distinct labels, ascending by numeric value.

    Raises ValueError for labels that do not parse as numbers.
    """
    if not raw_labels:
        raise ValueError("cannot build a label dictionary from an empty label list")
    distinct = set(raw_labels)
    keyed = []
    for lab in distinct:
        try:
            keyed.append((float(lab), lab))
        except ValueError:
            raise ValueError(f"non-numeric class label: {lab!r}") from None
    keyed.sort()
    return {lab: i for i, (_, lab) in enumerate(keyed)}


@dataclass(frozen=True)
class Dataset:
    """Sparse sample matrix plus integer class labels.

    Attributes:
        indptr: int64 array, len N+1; row i occupies [indptr[i], indptr[i+1]).
        findex: int32 array of 1-based feature indices, strictly ascending per row.
        values: float64 array parallel to findex.
        labels: int32 array of class ids, len N.
        num_features: M; every stored index is <= M.
        label_dict: original label string -> class id. Many-to-one after a
            class merge (the mapping is how the merge is recorded).
        class_names: display name per class id, len K.
    """

    indptr: np.ndarray
    findex: np.ndarray
    values: np.ndarray
    labels: np.ndarray
    num_features: int
    label_dict: dict[str, int]
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = len(self.labels)
        if n < 1:
            raise ValueError("dataset must contain at least one sample")
        if len(self.indptr) != n + 1:
            raise ValueError("indptr length must be n_samples + 1")
        if self.num_features < 1:
            raise ValueError("num_features must be positive")
        if len(self.findex) and self.findex.max() > self.num_features:
            raise ValueError("feature index exceeds num_features")
        if len(self.findex) and self.findex.min() < 1:
            raise ValueError("feature indices are 1-based; got index < 1")
        # Strictly ascending indices within each row: diffs may only be
        # non-positive at row boundaries.
        diffs = np.diff(self.findex.astype(np.int64))
        bad = np.flatnonzero(diffs <= 0)
        boundaries = set((self.indptr[1:-1] - 1).tolist())
        for b in bad:
            if int(b) not in boundaries:
                raise ValueError("feature indices must be strictly ascending within a sample")
        k = self.num_classes
        if set(self.label_dict.values()) != set(range(k)):
            raise ValueError("label dictionary must cover class ids 0..K-1 without gaps")
        if self.labels.min() < 0 or self.labels.max() >= k:
            raise ValueError("labels out of range for the label dictionary")
        if not self.class_names:
            names = [""] * k
            for lab, cid in self.label_dict.items():
                if not names[cid]:
                    names[cid] = lab
            object.__setattr__(self, "class_names", tuple(names))
        if len(self.class_names) != k:
            raise ValueError("class_names length must equal the number of classes")

    @property
    def n_samples(self) -> int:
        return len(self.labels)

    @property
    def num_classes(self) -> int:
        return max(self.label_dict.values()) + 1

    def sample(self, i: int) -> list[tuple[int, float]]:
        """Sparse entries of sample i as (1-based feature index, value) pairs."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return [(int(j), float(v)) for j, v in zip(self.findex[lo:hi], self.values[lo:hi])]

    def to_dense(self) -> np.ndarray:
        """Materialize the N x M float64 matrix (column j-1 holds feature j)."""
        dense = np.zeros((self.n_samples, self.num_features), dtype=np.float64)
        rows = np.repeat(np.arange(self.n_samples), np.diff(self.indptr))
        dense[rows, self.findex - 1] = self.values
        return dense

    def label_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes).astype(np.int64)

    @classmethod
    def from_rows(
        cls,
        rows: list[list[tuple[int, float]]],
        raw_labels: list[str],
        num_features: int | None = None,
        label_dict: dict[str, int] | None = None,
    ) -> "Dataset":
        """Build a dataset from per-sample (index, value) pair lists.

        Convenience constructor for tests and in-memory data; feature indices
        are 1-based and must be strictly ascending within each row.
        """
        if len(rows) != len(raw_labels):
            raise ValueError("rows and raw_labels must have equal length")
        if label_dict is None:
            label_dict = build_label_dict(raw_labels)
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        fidx: list[int] = []
        vals: list[float] = []
        for i, row in enumerate(rows):
            for j, v in row:
                fidx.append(j)
                vals.append(v)
            indptr[i + 1] = len(fidx)
        try:
            labels = np.array([label_dict[lab] for lab in raw_labels], dtype=np.int32)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not present in the label dictionary") from None
        observed_max = max(fidx) if fidx else 1
        m = max(num_features or 1, observed_max)
        return cls(
            indptr=indptr,
            findex=np.array(fidx, dtype=np.int32),
            values=np.array(vals, dtype=np.float64),
            labels=labels,
            num_features=m,
            label_dict=dict(label_dict),
        )


def class_priors(ds: Dataset) -> np.ndarray:
    """Per-class prevalence count(y)/N on the dataset.

    Raises DegenerateClassError when a dictionary class has no samples:
    a zero prior would make the class undecidable and forest training
    meaningless for it.
    """
    counts = ds.label_counts()
    if (counts == 0).any():
        missing = np.flatnonzero(counts == 0).tolist()
        names = [ds.class_names[c] for c in missing]
        raise DegenerateClassError(
            f"classes with no samples: ids {missing} (labels {names})"
        )
    return counts / counts.sum()


def majority_prior(ds: Dataset) -> float:
    """Prevalence of the most frequent class."""
    counts = ds.label_counts()
    return float(counts.max() / counts.sum())


def merge_bottom_classes(ds: Dataset, final_class_count: int) -> Dataset:
    """Merge the lowest-numbered original classes into a single majority class.

    The (K - final_class_count + 1) classes with the lowest original numeric
    labels collapse into class id 0; the remaining classes keep their relative
    order as ids 1..final_class_count-1. Feature data is shared untouched;
    only labels and the dictionary change. Identity when final_class_count
    equals the current class count.
    """
    k = ds.num_classes
    if final_class_count < 2:
        raise ValueError("final_class_count must be at least 2")
    if final_class_count > k:
        raise ValueError(
            f"final_class_count {final_class_count} exceeds current class count {k}"
        )
    n_merged = k - final_class_count + 1
    remap = np.array(
        [0 if old < n_merged else old - n_merged + 1 for old in range(k)],
        dtype=np.int32,
    )
    new_dict = {lab: int(remap[cid]) for lab, cid in ds.label_dict.items()}
    if n_merged == 1:
        merged_name = ds.class_names[0]
    else:
        merged_name = f"merged({ds.class_names[0]}..{ds.class_names[n_merged - 1]})"
    names = (merged_name,) + tuple(ds.class_names[n_merged:])
    return Dataset(
        indptr=ds.indptr,
        findex=ds.findex,
        values=ds.values,
        labels=remap[ds.labels],
        num_features=ds.num_features,
        label_dict=new_dict,
        class_names=names,
    )
