"""Versioned, human-inspectable text serialization of trained forests.

Layout: header line, [params], [classes], [labelmap], [priors], one
[tree i] block per tree (preorder node list), then one [oob i] count block
per tree, closed by [end]. Floats are written with repr(), which is the
shortest decimal that round-trips exactly, so a load/save cycle is
byte-identical and loaded models predict identically.
"""

from __future__ import annotations

from typing import IO

import numpy as np

from .errors import ModelFormatError
from .forest import ConfusionMatrix, ForestModel, ForestParams
from .tree import Tree, TreeParams

FORMAT_NAME = "bayesforest-model"
FORMAT_VERSION = 1


def _fmt_float(v: float) -> str:
    return repr(float(v))


def save_model(model: ForestModel, stream: IO[str]) -> None:
    w = stream.write
    w(f"{FORMAT_NAME} {FORMAT_VERSION}\n")

    tp = model.params.tree_params
    w("[params]\n")
    w(f"num_trees {model.params.num_trees}\n")
    w(f"seed {model.params.seed}\n")
    w(f"min_samples_split {tp.min_samples_split}\n")
    fpn = "none" if tp.features_per_node is None else str(tp.features_per_node)
    w(f"features_per_node {fpn}\n")
    w(f"max_depth {'none' if tp.max_depth is None else tp.max_depth}\n")
    w(f"num_features {model.num_features}\n")

    k = model.num_classes
    w(f"[classes {k}]\n")
    for cid in range(k):
        w(f"{cid} {model.class_names[cid]}\n")

    items = sorted(model.label_dict.items(), key=lambda kv: (float(kv[0]), kv[0]))
    w(f"[labelmap {len(items)}]\n")
    for lab, cid in items:
        w(f"{lab} {cid}\n")

    w("[priors]\n")
    w(" ".join(_fmt_float(p) for p in model.priors) + "\n")

    for t, tree in enumerate(model.trees):
        w(f"[tree {t} {tree.n_nodes}]\n")
        for i in range(tree.n_nodes):
            if tree.feature[i] >= 1:
                w(
                    f"i {tree.feature[i]} {_fmt_float(tree.threshold[i])} "
                    f"{tree.left[i]} {tree.right[i]}\n"
                )
            else:
                w(f"l {tree.leaf_class[i]}\n")

    for t, m in enumerate(model.oob_matrices):
        w(f"[oob {t}]\n")
        for row in m.counts:
            w(" ".join(str(int(v)) for v in row) + "\n")

    w("[end]\n")


class _Reader:
    def __init__(self, stream: IO[str]):
        self.lines = stream.read().splitlines()
        self.pos = 0

    def next_line(self, context: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"unexpected end of file while reading {context}")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect_section(self, name: str) -> list[str]:
        line = self.next_line(f"section [{name}]")
        if not (line.startswith("[") and line.endswith("]")):
            raise ModelFormatError(f"expected section [{name}], got {line!r}")
        fields = line[1:-1].split()
        if not fields or fields[0] != name:
            raise ModelFormatError(f"expected section [{name}], got {line!r}")
        return fields[1:]


def _parse_int(tok: str, context: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ModelFormatError(f"invalid integer {tok!r} in {context}") from None


def _parse_float(tok: str, context: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ModelFormatError(f"invalid number {tok!r} in {context}") from None


def load_model(stream: IO[str]) -> ForestModel:
    """Parse a model file, revalidating every structural invariant."""
    r = _Reader(stream)
    header = r.next_line("header").split()
    if len(header) != 2 or header[0] != FORMAT_NAME:
        raise ModelFormatError("not a bayesforest model file (bad header)")
    if _parse_int(header[1], "header") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {header[1]}")

    r.expect_section("params")
    raw: dict[str, str] = {}
    for _ in range(6):
        key, _, val = r.next_line("params entry").partition(" ")
        raw[key] = val
    for key in ("num_trees", "seed", "min_samples_split", "features_per_node", "max_depth", "num_features"):
        if key not in raw:
            raise ModelFormatError(f"params section is missing {key!r}")
    tree_params = TreeParams(
        min_samples_split=_parse_int(raw["min_samples_split"], "params"),
        features_per_node=None
        if raw["features_per_node"] == "none"
        else _parse_int(raw["features_per_node"], "params"),
        max_depth=None if raw["max_depth"] == "none" else _parse_int(raw["max_depth"], "params"),
    )
    num_trees = _parse_int(raw["num_trees"], "params")
    seed = _parse_int(raw["seed"], "params")
    num_features = _parse_int(raw["num_features"], "params")

    (k_tok,) = r.expect_section("classes")
    k = _parse_int(k_tok, "classes header")
    if k < 1:
        raise ModelFormatError("class count must be positive")
    class_names = []
    for cid in range(k):
        line = r.next_line("class name").split(maxsplit=1)
        if len(line) != 2 or _parse_int(line[0], "class name") != cid:
            raise ModelFormatError(f"malformed class entry for id {cid}")
        class_names.append(line[1])

    (n_lab_tok,) = r.expect_section("labelmap")
    n_labels = _parse_int(n_lab_tok, "labelmap header")
    label_dict: dict[str, int] = {}
    for _ in range(n_labels):
        parts = r.next_line("labelmap entry").split()
        if len(parts) != 2:
            raise ModelFormatError("malformed labelmap entry")
        cid = _parse_int(parts[1], "labelmap")
        if not 0 <= cid < k:
            raise ModelFormatError(f"labelmap class id {cid} out of range")
        if parts[0] in label_dict:
            raise ModelFormatError(f"duplicate label {parts[0]!r} in labelmap")
        label_dict[parts[0]] = cid
    if set(label_dict.values()) != set(range(k)):
        raise ModelFormatError("labelmap does not cover every class id")

    r.expect_section("priors")
    priors = np.array(
        [_parse_float(tok, "priors") for tok in r.next_line("priors").split()],
        dtype=np.float64,
    )
    if len(priors) != k:
        raise ModelFormatError(f"expected {k} priors, got {len(priors)}")
    if (priors <= 0).any() or (priors > 1).any() or abs(priors.sum() - 1.0) > 1e-9:
        raise ModelFormatError("priors must lie in (0,1] and sum to 1")

    trees: list[Tree] = []
    for t in range(num_trees):
        t_tok, n_tok = r.expect_section("tree")
        if _parse_int(t_tok, "tree header") != t:
            raise ModelFormatError(f"expected [tree {t}], found [tree {t_tok}]")
        n_nodes = _parse_int(n_tok, "tree header")
        feature = np.full(n_nodes, -1, np.int32)
        threshold = np.zeros(n_nodes, np.float64)
        left = np.full(n_nodes, -1, np.int32)
        right = np.full(n_nodes, -1, np.int32)
        leaf_class = np.full(n_nodes, -1, np.int32)
        for i in range(n_nodes):
            parts = r.next_line(f"tree {t} node").split()
            if parts and parts[0] == "i" and len(parts) == 5:
                feature[i] = _parse_int(parts[1], "node")
                threshold[i] = _parse_float(parts[2], "node")
                left[i] = _parse_int(parts[3], "node")
                right[i] = _parse_int(parts[4], "node")
            elif parts and parts[0] == "l" and len(parts) == 2:
                leaf_class[i] = _parse_int(parts[1], "node")
            else:
                raise ModelFormatError(f"malformed node line in tree {t}: {parts!r}")
        tree = Tree(feature, threshold, left, right, leaf_class)
        try:
            tree.validate(num_features, k)
        except ValueError as exc:
            raise ModelFormatError(f"tree {t}: {exc}") from None
        trees.append(tree)

    matrices: list[ConfusionMatrix] = []
    for t in range(num_trees):
        (t_tok,) = r.expect_section("oob")
        if _parse_int(t_tok, "oob header") != t:
            raise ModelFormatError(f"expected [oob {t}], found [oob {t_tok}]")
        counts = np.zeros((k, k), np.int64)
        for y in range(k):
            row = r.next_line(f"oob {t} row").split()
            if len(row) != k:
                raise ModelFormatError(f"oob matrix {t} row {y} has {len(row)} entries, expected {k}")
            counts[y] = [_parse_int(tok, "oob count") for tok in row]
        try:
            matrices.append(ConfusionMatrix(counts))
        except ValueError as exc:
            raise ModelFormatError(f"oob matrix {t}: {exc}") from None

    r.expect_section("end")
    try:
        return ForestModel(
            trees=trees,
            oob_matrices=matrices,
            priors=priors,
            label_dict=label_dict,
            class_names=tuple(class_names),
            params=ForestParams(num_trees=num_trees, tree_params=tree_params, seed=seed),
            num_features=num_features,
        )
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None


def save_model_file(model: ForestModel, path) -> None:
    from .libsvm import open_text

    with open_text(path, "wt") as fh:
        save_model(model, fh)


def load_model_file(path) -> ForestModel:
    from .libsvm import open_text

    with open_text(path) as fh:
        return load_model(fh)
