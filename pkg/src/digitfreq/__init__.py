"""Digit-frequency counting benchmark library."""

from .data import (
    DatasetSpec,
    DigitDataset,
    DigitSample,
    Encoding,
    SplitDataset,
    count_digits,
    encode,
    generate_dataset,
    read_dataset,
    split_dataset,
    write_dataset,
)
from .errors import ConfigurationError, DataIntegrityError, StaleCacheError, TrainingDiverged
from .metrics import EvalReport, accuracy, aggregate_runs, classify, evaluate, mae, rmse
from .cart import (
    RegressionTree,
    TreeConfig,
    best_split,
    dump_tree,
    fit_tree,
    impurity,
    predict_tree,
    tree_stats,
)
from .forest import ForestConfig, RandomForest, fit_forest, predict_forest
from .nn import LossHistory, MlpConfig, MlpModel, predict_nn, train
from .harness import (
    ExperimentConfig,
    MethodId,
    constant_baseline,
    probe_special_cases,
    run_ablation,
    run_experiment,
    run_suite,
)

__version__ = "0.1.0"
