"""Experiment orchestration for the benchmark.

Six methods (trees, forests, and networks on the two encodings) run against
the 6-digit and 10-digit datasets with per-run seed derivation, aggregated
metrics, benchmark-style tables, special-case probes, a constant sanity
baseline, loss-curve emission, and the hyperparameter ablation grid.

Method key:
  DT1  decision tree, whole-number feature      DT2  decision tree, digit columns
  RF1  random forest, whole-number feature      RF2  random forest, digit columns
  NN   dense network, digit columns             NN_EMB  dense network + digit embedding
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .cart import TreeConfig, fit_tree, predict_tree
from .data import (
    DatasetSpec,
    DigitDataset,
    Encoding,
    SplitDataset,
    count_digits,
    digits_from_int,
    encode,
    encode_number,
    generate_dataset,
    split_dataset,
)
from .errors import ConfigurationError
from .forest import ForestConfig, fit_forest, predict_forest
from .metrics import EvalReport, aggregate_runs, classify, evaluate
from .nn import LossHistory, MlpConfig, predict_nn, train
from .seeding import derive_seed

__all__ = [
    "MethodId",
    "ExperimentConfig",
    "TrainedMethod",
    "SuiteReport",
    "ProbeResult",
    "ProbeReport",
    "AblationCell",
    "AblationReport",
    "TABLE5_PRESET",
    "default_mlp_config",
    "prepare_splits",
    "train_method",
    "run_experiment",
    "run_suite",
    "probe_special_cases",
    "constant_baseline",
    "emit_loss_curves",
    "run_ablation",
]

DEFAULT_N = 150_000
DEFAULT_DATASET_SEED = 1234
DEFAULT_SPLIT_SEED = 5678
DEFAULT_RATIOS = (0.6, 0.2, 0.2)


class MethodId(str, Enum):
    DT1 = "DT1"
    DT2 = "DT2"
    RF1 = "RF1"
    RF2 = "RF2"
    NN = "NN"
    NN_EMB = "NN_EMB"

    @property
    def encoding(self) -> Encoding:
        return Encoding.ORIGINAL if self in (MethodId.DT1, MethodId.RF1) else Encoding.MODIFIED

    @property
    def is_network(self) -> bool:
        return self in (MethodId.NN, MethodId.NN_EMB)

    @property
    def is_forest(self) -> bool:
        return self in (MethodId.RF1, MethodId.RF2)

    @property
    def label(self) -> str:
        return METHOD_LABELS[self]


METHOD_LABELS = {
    MethodId.DT1: "Decision Tree 1",
    MethodId.DT2: "Decision Tree 2",
    MethodId.RF1: "Random Forest 1",
    MethodId.RF2: "Random Forest 2",
    MethodId.NN: "Neural Network",
    MethodId.NN_EMB: "Neural Network + Embedding",
}

TABLE_ORDER = (MethodId.DT1, MethodId.DT2, MethodId.RF1, MethodId.RF2, MethodId.NN, MethodId.NN_EMB)

SPLIT_ALIASES = {"val": "validation", "validation": "validation", "test": "test", "train": "train"}


def default_mlp_config(method: MethodId, d: int, seed: int = 0) -> MlpConfig:
    """The benchmark's network hyperparameters for each dataset.

    16 epochs, batch 64, Adam under a one-cycle rate policy peaking at the
    listed learning rate.  Non-benchmark digit lengths fall back to the
    6-digit shapes.
    """
    if not method.is_network:
        raise ConfigurationError(f"{method} is not a network method")
    if method is MethodId.NN:
        hidden, lr = ((128, 128, 128), 0.01) if d == 10 else ((96, 96, 96), 0.01)
    else:
        hidden, lr = ((256, 256, 256), 0.005) if d == 10 else ((96, 96, 96), 0.01)
    return MlpConfig(
        d=d,
        hidden_layers=hidden,
        learning_rate=lr,
        use_embedding=method is MethodId.NN_EMB,
        seed=seed,
        lr_schedule="one_cycle",
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """One method on one dataset: everything needed to replay the runs."""

    method: MethodId
    dataset: DatasetSpec
    split_seed: int = DEFAULT_SPLIT_SEED
    ratios: tuple = DEFAULT_RATIOS
    eval_split: str = "validation"
    n_runs: int = 5
    seed: int = 0
    mlp: Optional[MlpConfig] = None
    forest: Optional[ForestConfig] = None
    tree: Optional[TreeConfig] = None

    def __post_init__(self):
        if self.n_runs < 1:
            raise ConfigurationError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.eval_split not in SPLIT_ALIASES:
            raise ConfigurationError(f"eval_split must be one of {sorted(set(SPLIT_ALIASES))}")
        if self.method.is_network and self.method.encoding is not Encoding.MODIFIED:
            raise ConfigurationError("network methods train on the digit-column encoding only")

    def to_dict(self) -> dict:
        payload = {
            "method": self.method.value,
            "dataset": {
                "d": self.dataset.d,
                "n": self.dataset.n,
                "seed": self.dataset.seed,
                "leading_zeros": self.dataset.leading_zeros,
            },
            "split_seed": self.split_seed,
            "ratios": list(self.ratios),
            "eval_split": self.eval_split,
            "n_runs": self.n_runs,
            "seed": self.seed,
        }
        if self.mlp is not None:
            payload["mlp"] = {
                "hidden_layers": list(self.mlp.hidden_layers),
                "learning_rate": self.mlp.learning_rate,
                "epochs": self.mlp.epochs,
                "batch_size": self.mlp.batch_size,
                "optimizer": self.mlp.optimizer,
                "use_embedding": self.mlp.use_embedding,
                "lr_schedule": self.mlp.lr_schedule,
            }
        if self.forest is not None:
            payload["forest"] = {
                "n_trees": self.forest.n_trees,
                "bootstrap": self.forest.bootstrap,
                "feature_subset_size": self.forest.feature_subset_size,
            }
        if self.tree is not None:
            payload["tree"] = {
                "min_samples_leaf": self.tree.min_samples_leaf,
                "max_depth": self.tree.max_depth,
                "min_impurity_decrease": self.tree.min_impurity_decrease,
            }
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        ds = payload.get("dataset", {})
        dataset = DatasetSpec(
            d=ds.get("d", 6),
            n=ds.get("n", DEFAULT_N),
            seed=ds.get("seed", DEFAULT_DATASET_SEED),
            leading_zeros=ds.get("leading_zeros", True),
        )
        method = MethodId(payload["method"])
        mlp = None
        if "mlp" in payload:
            m = payload["mlp"]
            base = default_mlp_config(method, dataset.d) if method.is_network else MlpConfig(d=dataset.d)
            mlp = replace(
                base,
                hidden_layers=tuple(m.get("hidden_layers", base.hidden_layers)),
                learning_rate=m.get("learning_rate", base.learning_rate),
                epochs=m.get("epochs", base.epochs),
                batch_size=m.get("batch_size", base.batch_size),
                optimizer=m.get("optimizer", base.optimizer),
                use_embedding=m.get("use_embedding", base.use_embedding),
                lr_schedule=m.get("lr_schedule", base.lr_schedule),
            )
        forest = None
        if "forest" in payload:
            f = payload["forest"]
            forest = ForestConfig(
                n_trees=f.get("n_trees", 100),
                bootstrap=f.get("bootstrap", True),
                feature_subset_size=f.get("feature_subset_size"),
            )
        tree = None
        if "tree" in payload:
            t = payload["tree"]
            tree = TreeConfig(
                min_samples_leaf=t.get("min_samples_leaf", 1),
                max_depth=t.get("max_depth"),
                min_impurity_decrease=t.get("min_impurity_decrease", 0.0),
            )
        return cls(
            method=method,
            dataset=dataset,
            split_seed=payload.get("split_seed", DEFAULT_SPLIT_SEED),
            ratios=tuple(payload.get("ratios", DEFAULT_RATIOS)),
            eval_split=payload.get("eval_split", "validation"),
            n_runs=payload.get("n_runs", 5),
            seed=payload.get("seed", 0),
            mlp=mlp,
            forest=forest,
            tree=tree,
        )


@dataclass
class TrainedMethod:
    """A fitted model plus what is needed to query it uniformly."""

    method: MethodId
    d: int
    model: object
    history: Optional[LossHistory] = None
    run_seed: int = 0

    @property
    def encoding(self) -> Encoding:
        return self.method.encoding

    def predict_raw(self, dataset: DigitDataset) -> np.ndarray:
        if self.method.is_network:
            return predict_nn(self.model, dataset)
        X = encode(dataset, self.encoding)
        if self.method.is_forest:
            return predict_forest(self.model, X)
        return predict_tree(self.model, X)

    def predict_number(self, value: int) -> np.ndarray:
        if self.method.is_network:
            return predict_nn(self.model, digits_from_int(value, self.d).astype(np.float64).reshape(1, -1))[0]
        x = encode_number(value, self.d, self.encoding)
        if self.method.is_forest:
            return predict_forest(self.model, x)[0]
        return predict_tree(self.model, x)[0]


def prepare_splits(config: ExperimentConfig) -> SplitDataset:
    return split_dataset(generate_dataset(config.dataset), config.ratios, config.split_seed)


def train_method(config: ExperimentConfig, splits: SplitDataset, run_index: int = 0) -> TrainedMethod:
    """Fit the configured method on the training split.

    The run seed is derived from (master seed, method, run index), so each
    run is independently reproducible.  Tree fits consume no randomness and
    are identical across runs on fixed data.
    """
    method = config.method
    d = config.dataset.d
    run_seed = derive_seed(config.seed, method.value, run_index)
    history = None
    if method.is_network:
        mlp = config.mlp if config.mlp is not None else default_mlp_config(method, d)
        mlp = replace(mlp, d=d, seed=run_seed)
        model, history = train(mlp, splits.train, splits.validation)
    else:
        X = encode(splits.train, method.encoding)
        Y = splits.train.targets()
        if method.is_forest:
            forest_cfg = config.forest if config.forest is not None else ForestConfig()
            forest_cfg = replace(forest_cfg, seed=run_seed)
            model = fit_forest(X, Y, forest_cfg, d=d, encoding=method.encoding)
        else:
            tree_cfg = config.tree if config.tree is not None else TreeConfig()
            model = fit_tree(X, Y, tree_cfg, seed=run_seed, d=d, encoding=method.encoding)
    return TrainedMethod(method=method, d=d, model=model, history=history, run_seed=run_seed)


def evaluate_method(trained: TrainedMethod, data: DigitDataset, **meta) -> EvalReport:
    return evaluate(data.targets(), trained.predict_raw(data), d=trained.d, **meta)


def run_experiment(
    config: ExperimentConfig,
    run_index: int = 0,
    splits: Optional[SplitDataset] = None,
) -> EvalReport:
    """One seeded run: train on the 90k split, evaluate on the configured split."""
    if splits is None:
        splits = prepare_splits(config)
    trained = train_method(config, splits, run_index)
    split_name = SPLIT_ALIASES[config.eval_split]
    return evaluate_method(
        trained,
        splits.split(split_name),
        model=config.method.label,
        dataset=f"{config.dataset.d}-digit",
        split=split_name,
    )


@dataclass
class SuiteReport:
    """All requested methods on one dataset and evaluation split."""

    dataset: DatasetSpec
    split_seed: int
    eval_split: str
    n_runs: int
    seed: int
    rows: dict = field(default_factory=dict)
    run_seeds: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    histories: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "dataset": {"d": self.dataset.d, "n": self.dataset.n, "seed": self.dataset.seed},
            "split_seed": self.split_seed,
            "eval_split": self.eval_split,
            "n_runs": self.n_runs,
            "seed": self.seed,
            "rows": {m: r.to_dict() for m, r in sorted(self.rows.items())},
            "run_seeds": {m: s for m, s in sorted(self.run_seeds.items())},
            "errors": dict(sorted(self.errors.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_markdown(self) -> str:
        title = f"{self.dataset.d}-Digit {self.eval_split.capitalize()} Set"
        lines = [
            f"### {title} ({self.n_runs} run{'s' if self.n_runs != 1 else ''} per method)",
            "",
            "| Method | RMSE | MAE | Accuracy |",
            "| --- | --- | --- | --- |",
        ]
        for method in TABLE_ORDER:
            key = method.value
            if key in self.rows:
                r = self.rows[key]
                if self.n_runs > 1:
                    cells = f"{r.rmse:.3f}±{r.rmse_std:.3f} | {r.mae:.3f}±{r.mae_std:.3f} | {100 * r.accuracy:.3f}%"
                else:
                    cells = f"{r.rmse:.3f} | {r.mae:.3f} | {100 * r.accuracy:.3f}%"
                lines.append(f"| {method.label} | {cells} |")
            elif key in self.errors:
                lines.append(f"| {method.label} | failed | failed | failed |")
        if self.errors:
            lines.append("")
            for key, err in sorted(self.errors.items()):
                lines.append(f"- {key} failed: {err}")
        return "\n".join(lines)


def run_suite(
    dataset: DatasetSpec | DigitDataset,
    methods: Sequence[MethodId] = TABLE_ORDER,
    n_runs: int = 5,
    seed: int = 0,
    eval_split: str = "validation",
    split_seed: int = DEFAULT_SPLIT_SEED,
    ratios: tuple = DEFAULT_RATIOS,
    out_dir=None,
) -> SuiteReport:
    """Run every method ``n_runs`` times and aggregate, isolating failures.

    A failing method is recorded in ``errors`` and the suite continues.
    With ``out_dir`` set, writes ``suite_<d>digit_<split>.json`` / ``.md``
    and one loss-curve CSV per network method.
    """
    if isinstance(dataset, DigitDataset):
        data = dataset
        spec = dataset.spec or DatasetSpec(d=dataset.d, n=len(dataset), seed=0)
    else:
        spec = dataset
        data = generate_dataset(spec)
    splits = split_dataset(data, ratios, split_seed)
    split_name = SPLIT_ALIASES[eval_split]
    report = SuiteReport(
        dataset=spec, split_seed=split_seed, eval_split=split_name, n_runs=n_runs, seed=seed
    )
    for method in methods:
        method = MethodId(method)
        config = ExperimentConfig(
            method=method, dataset=spec, split_seed=split_seed, ratios=ratios,
            eval_split=split_name, n_runs=n_runs, seed=seed,
        )
        try:
            runs = []
            for run_index in range(n_runs):
                trained = train_method(config, splits, run_index)
                runs.append(
                    evaluate_method(
                        trained,
                        splits.split(split_name),
                        model=method.label,
                        dataset=f"{spec.d}-digit",
                        split=split_name,
                    )
                )
                if run_index == 0 and trained.history is not None:
                    report.histories[method.value] = trained.history
            report.rows[method.value] = aggregate_runs(runs)
            report.run_seeds[method.value] = [
                derive_seed(seed, method.value, i) for i in range(n_runs)
            ]
        except Exception as exc:  # per-cell isolation: one failure must not void the table
            report.errors[method.value] = f"{type(exc).__name__}: {exc}"
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = f"suite_{spec.d}digit_{split_name}"
        (out_dir / f"{stem}.json").write_text(report.to_json() + "\n")
        (out_dir / f"{stem}.md").write_text(report.to_markdown() + "\n")
        for key, history in report.histories.items():
            emit_loss_curves(history, out_dir / f"loss_{key}_{spec.d}digit.csv")
    return report


@dataclass
class ProbeResult:
    method: MethodId
    number: int
    raw: np.ndarray
    classified: np.ndarray
    truth: np.ndarray

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "number": self.number,
            "raw": [float(v) for v in self.raw],
            "classified": [int(v) for v in self.classified],
            "truth": [int(v) for v in self.truth],
        }


@dataclass
class ProbeReport:
    d: int
    results: list
    pair_identical: dict

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "results": [r.to_dict() for r in self.results],
            "pair_identical": {
                method: {f"{a},{b}": bool(v) for (a, b), v in pairs.items()}
                for method, pairs in sorted(self.pair_identical.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def probe_special_cases(models: dict, numbers: Sequence[int]) -> ProbeReport:
    """Raw and classified predictions for hand-picked numbers.

    ``numbers`` are grouped into consecutive pairs (0-1, 2-3, ...); for each
    pair and method the report flags whether the raw predictions came out
    identical, the signature of value-interval memorization.
    """
    if not models:
        raise ConfigurationError("no trained models supplied")
    d = next(iter(models.values())).d
    results = []
    pair_identical = {}
    for key, trained in models.items():
        method = MethodId(key)
        if trained.d != d:
            raise ConfigurationError("probe models disagree on digit length")
        raw_by_number = {}
        for number in numbers:
            raw = trained.predict_number(int(number))
            raw_by_number[int(number)] = raw
            results.append(
                ProbeResult(
                    method=method,
                    number=int(number),
                    raw=raw,
                    classified=classify(raw, d).astype(np.int64),
                    truth=count_digits(digits_from_int(int(number), d)),
                )
            )
        flags = {}
        for i in range(0, len(numbers) - 1, 2):
            a, b = int(numbers[i]), int(numbers[i + 1])
            flags[(a, b)] = bool(np.array_equal(raw_by_number[a], raw_by_number[b]))
        pair_identical[method.value] = flags
    return ProbeReport(d=d, results=results, pair_identical=pair_identical)


def constant_baseline(d: int, split: DigitDataset) -> EvalReport:
    """Sanity floor: predict the uniform count d/10 for every entry."""
    if split.d != d:
        raise ConfigurationError(f"split has d={split.d}, expected {d}")
    raw = np.full((len(split), 10), d / 10.0)
    return evaluate(
        split.targets(), raw, d=d,
        model=f"Constant {d}/10", dataset=f"{d}-digit", split="any",
    )


def emit_loss_curves(history: LossHistory, path) -> Path:
    """CSV with header ``epoch,train_mse,val_mse``, one row per epoch."""
    if len(history.train_mse) != len(history.val_mse):
        raise ConfigurationError("loss history is incomplete")
    path = Path(path)
    history.to_csv(path)
    return path


@dataclass(frozen=True)
class AblationCell:
    method: MethodId
    d: int
    learning_rate: float
    hidden_layers: tuple
    n: int = DEFAULT_N
    dataset_seed: int = DEFAULT_DATASET_SEED
    split_seed: int = DEFAULT_SPLIT_SEED
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "d": self.d,
            "learning_rate": self.learning_rate,
            "hidden_layers": list(self.hidden_layers),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AblationCell":
        return cls(
            method=MethodId(payload["method"]),
            d=payload["d"],
            learning_rate=payload["learning_rate"],
            hidden_layers=tuple(payload["hidden_layers"]),
            n=payload.get("n", DEFAULT_N),
            dataset_seed=payload.get("dataset_seed", DEFAULT_DATASET_SEED),
            split_seed=payload.get("split_seed", DEFAULT_SPLIT_SEED),
            seed=payload.get("seed", 0),
        )


# The alternative hyperparameter cells reported for the test sets.
TABLE5_PRESET = (
    AblationCell(method=MethodId.NN_EMB, d=6, learning_rate=1e-5, hidden_layers=(96, 96, 96)),
    AblationCell(method=MethodId.NN, d=10, learning_rate=0.003, hidden_layers=(128, 128, 128)),
    AblationCell(method=MethodId.NN_EMB, d=10, learning_rate=5e-3, hidden_layers=(256, 256, 256)),
)


@dataclass
class AblationReport:
    cells: list
    reports: list
    errors: dict

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        rows = []
        for cell, rep in zip(self.cells, self.reports):
            row = {"cell": cell.to_dict()}
            if rep is not None:
                row["rmse"] = rep.rmse
                row["mae"] = rep.mae
                row["accuracy"] = rep.accuracy
            rows.append(row)
        return {"rows": rows, "errors": {str(k): v for k, v in sorted(self.errors.items())}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_markdown(self) -> str:
        lines = [
            "| Test set | Method | Hyperparameters | RMSE | MAE |",
            "| --- | --- | --- | --- | --- |",
        ]
        for i, (cell, rep) in enumerate(zip(self.cells, self.reports)):
            hp = f"lr = {cell.learning_rate:g}, layers = {list(cell.hidden_layers)}"
            if rep is None:
                lines.append(f"| {cell.d}-Digit | {cell.method.label} | {hp} | failed | failed |")
            else:
                lines.append(
                    f"| {cell.d}-Digit | {cell.method.label} | {hp} | {rep.rmse:.3f} | {rep.mae:.3f} |"
                )
        return "\n".join(lines)


def run_ablation(grid: Sequence[AblationCell] = TABLE5_PRESET, splits_cache: Optional[dict] = None) -> AblationReport:
    """Evaluate each (method, lr, layers) cell on its test split.

    Divergent or failing cells are recorded and the grid continues.  An
    empty grid yields an empty, successful report.
    """
    reports = []
    errors = {}
    cache = {} if splits_cache is None else splits_cache
    cells = [c if isinstance(c, AblationCell) else AblationCell.from_dict(c) for c in grid]
    for i, cell in enumerate(cells):
        try:
            key = (cell.d, cell.n, cell.dataset_seed, cell.split_seed)
            if key not in cache:
                cache[key] = split_dataset(
                    generate_dataset(DatasetSpec(d=cell.d, n=cell.n, seed=cell.dataset_seed)),
                    DEFAULT_RATIOS,
                    cell.split_seed,
                )
            splits = cache[key]
            base = default_mlp_config(cell.method, cell.d)
            mlp = replace(base, hidden_layers=cell.hidden_layers, learning_rate=cell.learning_rate)
            config = ExperimentConfig(
                method=cell.method,
                dataset=DatasetSpec(d=cell.d, n=cell.n, seed=cell.dataset_seed),
                split_seed=cell.split_seed,
                eval_split="test",
                n_runs=1,
                seed=cell.seed,
                mlp=mlp,
            )
            trained = train_method(config, splits, 0)
            reports.append(
                evaluate_method(
                    trained, splits.test,
                    model=cell.method.label, dataset=f"{cell.d}-digit", split="test",
                )
            )
        except Exception as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
            reports.append(None)
    return AblationReport(cells=cells, reports=reports, errors=errors)
