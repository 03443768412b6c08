"""Command-line harness: train, evaluate, bench.

Exit codes: 0 success, 1 runtime failure (I/O, parse, configuration),
2 usage errors. All dataset and model paths accept .gz files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .aggregation import (
    BtaStrategy,
    EpsilonFloor,
    KunchevaExponent,
    MajorityVoteStrategy,
    Strategy,
    bta_decide_all,
    collect_votes,
    majority_vote_all,
)
from .bench import run_bench
from .dataset import Dataset, merge_bottom_classes
from .errors import ConfigurationError
from .libsvm import load_libsvm, open_text, write_predictions
from .forest import ForestParams, train_forest
from .metrics import confusion_from_predictions, evaluate
from .model_store import load_model_file, save_model_file
from .tree import TreeParams


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _load_train(path, merge_classes, train_limit) -> Dataset:
    ds, _ = load_libsvm(path, max_rows=train_limit)
    if merge_classes is not None:
        ds = merge_bottom_classes(ds, merge_classes)
    return ds


def _tree_params(args) -> TreeParams:
    return TreeParams(
        min_samples_split=args.min_split,
        features_per_node=args.features_per_node,
    )


def _strategy_from_token(token: str, epsilon: float, b: float) -> tuple[str, Strategy]:
    if token == "mv":
        return token, MajorityVoteStrategy()
    if token == "bta-eps":
        return token, BtaStrategy(EpsilonFloor(epsilon))
    if token == "bta-b":
        return f"bta-b{b:g}", BtaStrategy(KunchevaExponent(b))
    if token.startswith("bta-b"):
        return token, BtaStrategy(KunchevaExponent(float(token[len("bta-b"):])))
    raise ValueError(f"unknown strategy {token!r} (expected mv, bta-eps, bta-b or bta-b<value>)")


def _strategies_arg(text: str) -> list[str]:
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise argparse.ArgumentTypeError("no strategies given")
    for tok in tokens:
        if tok in ("mv", "bta-eps", "bta-b"):
            continue
        if tok.startswith("bta-b"):
            try:
                float(tok[len("bta-b"):])
                continue
            except ValueError:
                pass
        raise argparse.ArgumentTypeError(
            f"unknown strategy {tok!r} (expected mv, bta-eps, bta-b or bta-b<value>)"
        )
    return tokens


def _resolve_negative_class(arg: int | None, priors: np.ndarray) -> int:
    if arg is not None:
        return arg
    return int(np.argmax(priors))


def cmd_train(args) -> int:
    ds = _load_train(args.train, args.merge_classes, args.train_limit)
    params = ForestParams(num_trees=args.trees, tree_params=_tree_params(args), seed=args.seed)
    model = train_forest(ds, params, n_jobs=args.jobs)
    save_model_file(model, args.model)

    counts = ds.label_counts()
    oob_sizes = [int(m.counts.sum()) for m in model.oob_matrices]
    print(f"trained {model.num_trees} trees on {ds.n_samples} samples "
          f"({ds.num_features} features, {ds.num_classes} classes)")
    for cid, name in enumerate(ds.class_names):
        print(f"  class {cid} ({name}): {counts[cid]} samples, prior {model.priors[cid]:.4f}")
    print(f"  OOB sizes: mean {np.mean(oob_sizes):.1f}, min {min(oob_sizes)}, max {max(oob_sizes)}")
    print(f"model written to {args.model}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model_file(args.model)
    if args.merge_classes is not None and args.merge_classes != model.num_classes:
        raise ConfigurationError(
            f"--merge-classes {args.merge_classes} does not match the model's "
            f"{model.num_classes} classes"
        )
    # The model's label map already folds any class merge, so test labels
    # land directly on model class ids.
    test_ds, _ = load_libsvm(
        args.test, expected_num_features=model.num_features, label_dict=model.label_dict
    )
    name, strategy = _strategy_from_token(args.strategy, args.epsilon, args.b)

    xtest = test_ds.to_dense()
    votes = collect_votes(model, xtest)
    k = model.num_classes
    if isinstance(strategy, MajorityVoteStrategy):
        decisions = majority_vote_all(votes, k)
        scores = None
    else:
        decisions, scores = bta_decide_all(votes, model.oob_matrices, model.priors, strategy.smoothing)

    negative = _resolve_negative_class(args.negative_class, model.priors)
    report = evaluate(confusion_from_predictions(test_ds.labels, decisions, k), negative)
    print(f"strategy {name}, negative class {negative} ({model.class_names[negative]})")
    print(report.format_text(model.class_names))
    if args.report:
        doc = {"strategy": name, "dataset_size": test_ds.n_samples, **report.to_dict()}
        with open_text(args.report, "wt") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if args.predictions:
        if scores is None:
            frac = np.bincount(
                (np.arange(len(votes))[:, None] * k + votes).ravel(), minlength=len(votes) * k
            ).reshape(len(votes), k) / votes.shape[1]
            score_rows = frac
        else:
            score_rows = scores
        rows = [
            (i, model.class_names[decisions[i]], score_rows[i].tolist())
            for i in range(test_ds.n_samples)
        ]
        with open_text(args.predictions, "wt") as fh:
            write_predictions(fh, rows, model.class_names)
    return 0


def cmd_bench(args) -> int:
    train_ds = _load_train(args.train, args.merge_classes, args.train_limit)
    test_raw, _ = load_libsvm(
        args.test,
        expected_num_features=train_ds.num_features,
        label_dict=train_ds.label_dict,
    )
    strategies = [_strategy_from_token(tok, args.epsilon, args.b) for tok in args.strategies]
    report = run_bench(
        train_ds,
        test_raw,
        strategies,
        repeats=args.repeats,
        num_trees=args.trees,
        tree_params=_tree_params(args),
        seed_base=args.seed_base,
        n_jobs=args.jobs,
        negative_class=args.negative_class,
        parallel_repeats=args.parallel_repeats,
    )
    print(report.format_table())
    if args.report:
        with open_text(args.report, "wt") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def _add_tree_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=_positive_int, default=100, help="number of trees (default 100)")
    p.add_argument("--min-split", type=_positive_int, default=2,
                   help="minimum samples required to split a node (default 2)")
    p.add_argument("--features-per-node", type=_positive_int, default=None,
                   help="features drawn per node (default: floor(sqrt(num_features)))")
    p.add_argument("--merge-classes", type=_positive_int, default=None,
                   help="merge the lowest-labeled classes down to this many classes")
    p.add_argument("--train-limit", type=_positive_int, default=None,
                   help="use only the first N data lines of the training file")
    p.add_argument("--jobs", type=_positive_int, default=1, help="tree-training threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayesforest",
                                     description="Decision forests with Bayesian vote aggregation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a forest and save the model")
    p_train.add_argument("--train", required=True, help="training data (LibSVM, .gz ok)")
    p_train.add_argument("--model", required=True, help="output model path")
    p_train.add_argument("--seed", type=int, default=0)
    _add_tree_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="evaluate a saved model on a test split")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--strategy", choices=["mv", "bta-eps", "bta-b"], default="bta-eps")
    p_eval.add_argument("--epsilon", type=float, default=1e-5)
    p_eval.add_argument("--b", type=float, default=0.5)
    p_eval.add_argument("--merge-classes", type=_positive_int, default=None,
                        help="consistency check against the model's class count")
    p_eval.add_argument("--negative-class", type=int, default=None,
                        help="class excluded from macro averaging (default: largest prior)")
    p_eval.add_argument("--report", default=None, help="write a JSON report here")
    p_eval.add_argument("--predictions", default=None, help="write per-sample predictions here")
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = sub.add_parser("bench", help="repeated train/evaluate protocol")
    p_bench.add_argument("--train", required=True)
    p_bench.add_argument("--test", required=True)
    p_bench.add_argument("--repeats", type=_positive_int, default=10)
    p_bench.add_argument("--strategies", type=_strategies_arg, default=["mv", "bta-eps"],
                         help="comma list of mv, bta-eps, bta-b, bta-b<value>")
    p_bench.add_argument("--seed-base", type=int, default=0)
    p_bench.add_argument("--epsilon", type=float, default=1e-5)
    p_bench.add_argument("--b", type=float, default=0.5)
    p_bench.add_argument("--negative-class", type=int, default=None)
    p_bench.add_argument("--parallel-repeats", action="store_true",
                         help="run repeats concurrently (results are identical either way)")
    p_bench.add_argument("--report", default=None, help="write a JSON report here")
    _add_tree_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
