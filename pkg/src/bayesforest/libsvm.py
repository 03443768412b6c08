"""Reading and writing the LibSVM text format.

Each data line is `<label> <idx>:<val> <idx>:<val> ...` with 1-based,
strictly ascending feature indices. `#` starts a comment running to the
end of the line. Files ending in .gz are decompressed transparently.
"""

from __future__ import annotations

import gzip
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .dataset import Dataset, build_label_dict
from .errors import LibsvmParseError


@dataclass
class ParseDiagnostics:
    line_count: int
    skipped_blank_lines: int
    max_feature_index: int


def parse_libsvm(
    stream: Iterable[str],
    expected_num_features: int | None = None,
    label_dict: dict[str, int] | None = None,
    max_rows: int | None = None,
) -> tuple[Dataset, ParseDiagnostics]:
    """Parse LibSVM text into a Dataset.

    Args:
        stream: iterable of text lines.
        expected_num_features: lower bound for M; the observed maximum index
            may raise it further.
        label_dict: when given, labels are mapped through it (unknown labels
            are an error) instead of building a fresh dictionary. Used to
            align a test split with the training split.
        max_rows: stop after this many data lines (e.g. a fixed train-size
            protocol); remaining lines are not read.

    Returns:
        (Dataset, ParseDiagnostics)

    Raises:
        LibsvmParseError: on any malformed line, with its line number.
        ValueError: when the stream holds no data lines.
    """
    indptr = array("q", [0])
    findex = array("i")
    values = array("d")
    raw_labels: list[str] = []
    line_no = 0
    skipped = 0
    max_index = 0

    for line in stream:
        line_no += 1
        hash_pos = line.find("#")
        if hash_pos >= 0:
            line = line[:hash_pos]
        tokens = line.split()
        if not tokens:
            skipped += 1
            continue
        label = tokens[0]
        if ":" in label:
            raise LibsvmParseError(line_no, f"missing label before {label!r}")
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(line_no, f"expected <index>:<value>, got {tok!r}")
            try:
                idx = int(idx_s)
            except ValueError:
                raise LibsvmParseError(line_no, f"invalid feature index {idx_s!r}") from None
            try:
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(line_no, f"unparsable number {val_s!r}") from None
            if idx < 1:
                raise LibsvmParseError(line_no, f"feature index {idx} is below 1")
            if idx == prev:
                raise LibsvmParseError(line_no, f"duplicate feature index {idx}")
            if idx < prev:
                raise LibsvmParseError(line_no, f"feature indices not ascending at {idx}")
            prev = idx
            findex.append(idx)
            values.append(val)
        raw_labels.append(label)
        indptr.append(len(findex))
        if prev > max_index:
            max_index = prev
        if max_rows is not None and len(raw_labels) >= max_rows:
            break

    if not raw_labels:
        raise ValueError("no data lines in LibSVM input")

    if label_dict is None:
        label_dict = build_label_dict(raw_labels)
    try:
        labels = np.array([label_dict[lab] for lab in raw_labels], dtype=np.int32)
    except KeyError as exc:
        raise ValueError(
            f"label {exc.args[0]!r} does not appear in the reference label dictionary"
        ) from None

    ds = Dataset(
        indptr=np.frombuffer(indptr, dtype=np.int64).copy(),
        findex=np.frombuffer(findex, dtype=np.int32).copy(),
        values=np.frombuffer(values, dtype=np.float64).copy(),
        labels=labels,
        num_features=max(expected_num_features or 1, max_index, 1),
        label_dict=dict(label_dict),
    )
    diag = ParseDiagnostics(
        line_count=line_no,
        skipped_blank_lines=skipped,
        max_feature_index=max_index,
    )
    return ds, diag


def open_text(path: str | Path, mode: str = "rt") -> IO[str]:
    """Open a text file, decompressing .gz transparently."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def load_libsvm(path: str | Path, **kwargs) -> tuple[Dataset, ParseDiagnostics]:
    with open_text(path) as fh:
        return parse_libsvm(fh, **kwargs)


def emit_libsvm(ds: Dataset, stream: IO[str]) -> None:
    """Write a dataset back out in LibSVM format.

    Labels are written as their class display names, so a freshly parsed
    dataset round-trips exactly; merged datasets carry synthetic names and
    are not meant to be re-parsed.
    """
    for i in range(ds.n_samples):
        parts = [ds.class_names[ds.labels[i]]]
        parts.extend(f"{j}:{v!r}" for j, v in ds.sample(i))
        stream.write(" ".join(parts))
        stream.write("\n")


def write_predictions(
    stream: IO[str],
    predictions: Sequence[tuple[int, str, Sequence[float]]],
    class_names: Sequence[str],
) -> None:
    """Write one (index, predicted label, per-class scores) row per sample.

    The header names the score columns after the classes.
    """
    stream.write("index\tlabel\t" + "\t".join(class_names) + "\n")
    for sample_index, label, scores in predictions:
        row = [str(sample_index), label]
        row.extend(repr(float(s)) for s in scores)
        stream.write("\t".join(row) + "\n")
