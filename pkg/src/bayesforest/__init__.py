"""Decision forests with Bayesian vote aggregation.

The decision layer combines per-tree votes with out-of-bag-estimated error
profiles and class priors via the Bayes rule, next to plain majority voting.
"""

from .aggregation import (
    BtaStrategy,
    DecisionScores,
    EpsilonFloor,
    KunchevaExponent,
    MajorityVoteStrategy,
    bta_decide,
    majority_vote,
    predict_dataset,
    predict_forest,
    smoothed_conditional,
)
from .bench import BenchReport, run_bench
from .dataset import (
    Dataset,
    build_label_dict,
    class_priors,
    majority_prior,
    merge_bottom_classes,
)
from .errors import (
    ConfigurationError,
    DegenerateClassError,
    LibsvmParseError,
    ModelFormatError,
)
from .forest import (
    ConfusionMatrix,
    ForestModel,
    ForestParams,
    bootstrap_sample,
    train_forest,
)
from .libsvm import ParseDiagnostics, emit_libsvm, load_libsvm, parse_libsvm, write_predictions
from .metrics import ClassMetrics, EvalReport, confusion_from_predictions, evaluate
from .model_store import load_model, load_model_file, save_model, save_model_file
from .tree import Tree, TreeParams, gini_impurity, train_tree

__version__ = "0.1.0"

__all__ = [
    "BtaStrategy",
    "DecisionScores",
    "EpsilonFloor",
    "KunchevaExponent",
    "MajorityVoteStrategy",
    "bta_decide",
    "majority_vote",
    "predict_dataset",
    "predict_forest",
    "smoothed_conditional",
    "BenchReport",
    "run_bench",
    "Dataset",
    "build_label_dict",
    "class_priors",
    "majority_prior",
    "merge_bottom_classes",
    "ConfigurationError",
    "DegenerateClassError",
    "LibsvmParseError",
    "ModelFormatError",
    "ConfusionMatrix",
    "ForestModel",
    "ForestParams",
    "bootstrap_sample",
    "train_forest",
    "ParseDiagnostics",
    "emit_libsvm",
    "load_libsvm",
    "parse_libsvm",
    "write_predictions",
    "ClassMetrics",
    "EvalReport",
    "confusion_from_predictions",
    "evaluate",
    "load_model",
    "load_model_file",
    "save_model",
    "save_model_file",
    "Tree",
    "TreeParams",
    "gini_impurity",
    "train_tree",
]
