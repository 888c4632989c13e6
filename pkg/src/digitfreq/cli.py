"""Command-line entry points for the benchmark.

Subcommands: generate, suite, train, probe, inspect-tree, ablate, baseline.
Exit codes: 0 success, 1 any failed cell, 2 configuration error.  The
``DIGITFREQ_OUT_DIR`` environment variable sets the default output
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .cart import dump_tree, load_tree, save_tree
from .data import DatasetSpec, Encoding, generate_dataset, read_dataset, split_dataset, write_dataset
from .errors import ConfigurationError, DataIntegrityError
from .forest import load_forest, save_forest
from .harness import (
    DEFAULT_DATASET_SEED,
    DEFAULT_N,
    DEFAULT_RATIOS,
    DEFAULT_SPLIT_SEED,
    TABLE5_PRESET,
    AblationCell,
    ExperimentConfig,
    MethodId,
    TrainedMethod,
    constant_baseline,
    emit_loss_curves,
    evaluate_method,
    probe_special_cases,
    run_ablation,
    run_suite,
    train_method,
)
from .nn import load_model, save_model
from .seeding import derive_seed


def _out_dir(value) -> Path:
    path = Path(value if value is not None else os.environ.get("DIGITFREQ_OUT_DIR", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_generate(args) -> int:
    spec = DatasetSpec(d=args.digits, n=args.count, seed=args.seed,
                       leading_zeros=not args.no_leading_zeros)
    dataset = generate_dataset(spec)
    write_dataset(
        dataset,
        Encoding(args.encoding),
        args.out,
        split_ratios=DEFAULT_RATIOS,
        split_seed=derive_seed(args.seed, "split"),
    )
    print(f"wrote {len(dataset)} samples (d={spec.d}, {args.encoding}) to {args.out}")
    return 0


def _load_split_seed(path) -> int:
    manifest = Path(str(path) + ".manifest.json")
    if manifest.exists():
        with open(manifest) as fh:
            seed = json.load(fh).get("split_seed")
        if seed is not None:
            return seed
    return DEFAULT_SPLIT_SEED


def _cmd_suite(args) -> int:
    dataset = read_dataset(args.dataset)
    methods = (
        list(MethodId) if args.methods == "all"
        else [MethodId(m.strip()) for m in args.methods.split(",") if m.strip()]
    )
    split = "validation" if args.split == "val" else args.split
    n_runs = args.runs if args.runs is not None else (5 if split == "validation" else 1)
    report = run_suite(
        dataset,
        methods=methods,
        n_runs=n_runs,
        seed=args.seed,
        eval_split=split,
        split_seed=_load_split_seed(args.dataset),
        out_dir=_out_dir(args.out),
    )
    print(report.to_markdown())
    return 0 if report.ok else 1


def _cmd_train(args) -> int:
    if args.config:
        with open(args.config) as fh:
            payload = json.load(fh)
        payload["method"] = args.method
        config = ExperimentConfig.from_dict(payload)
    else:
        config = ExperimentConfig(
            method=MethodId(args.method),
            dataset=DatasetSpec(d=args.digits, n=DEFAULT_N, seed=DEFAULT_DATASET_SEED),
        )
    splits = split_dataset(generate_dataset(config.dataset), config.ratios, config.split_seed)
    trained = train_method(config, splits, run_index=0)
    out = _out_dir(args.out)
    stem = f"{config.method.value}_{config.dataset.d}digit"
    model_path = out / f"{stem}.json"
    if config.method.is_network:
        save_model(trained.model, model_path)
    elif config.method.is_forest:
        save_forest(trained.model, model_path)
    else:
        save_tree(trained.model, model_path)
    report = evaluate_method(
        trained, splits.split(config.eval_split),
        model=config.method.label, dataset=f"{config.dataset.d}-digit", split=config.eval_split,
    )
    (out / f"{stem}_metrics.json").write_text(report.to_json(indent=2, sort_keys=True) + "\n")
    if trained.history is not None:
        emit_loss_curves(trained.history, out / f"loss_{stem}.csv")
    print(f"saved {model_path}")
    print(report.to_json(sort_keys=True))
    return 0


def _load_any_model(path: Path):
    with open(path) as fh:
        kind = json.load(fh).get("kind")
    if kind == "regression_tree":
        model = load_tree(path)
        method = MethodId.DT1 if model.encoding is Encoding.ORIGINAL else MethodId.DT2
        return TrainedMethod(method=method, d=model.d, model=model)
    if kind == "random_forest":
        model = load_forest(path)
        method = MethodId.RF1 if model.encoding is Encoding.ORIGINAL else MethodId.RF2
        return TrainedMethod(method=method, d=model.d, model=model)
    if kind == "mlp":
        model = load_model(path)
        method = MethodId.NN_EMB if model.config.use_embedding else MethodId.NN
        return TrainedMethod(method=method, d=model.config.d, model=model)
    raise ConfigurationError(f"{path}: unrecognized model kind {kind!r}")


def _cmd_probe(args) -> int:
    models_dir = Path(args.models)
    models = {}
    for path in sorted(models_dir.glob("*.json")):
        if path.name.endswith("_metrics.json") or path.name.endswith(".manifest.json"):
            continue
        trained = _load_any_model(path)
        models[trained.method.value] = trained
    if not models:
        raise ConfigurationError(f"no model files found in {models_dir}")
    numbers = [int(v) for v in args.numbers.split(",") if v.strip()]
    report = probe_special_cases(models, numbers)
    print(report.to_json())
    return 0


def _cmd_inspect_tree(args) -> int:
    tree = load_tree(args.model)
    print(dump_tree(tree, max_nodes=args.nodes))
    return 0


def _cmd_ablate(args) -> int:
    if args.grid == "preset":
        grid = TABLE5_PRESET
    else:
        with open(args.grid) as fh:
            grid = [AblationCell.from_dict(cell) for cell in json.load(fh)]
    report = run_ablation(grid)
    out = _out_dir(args.out)
    (out / "ablation.json").write_text(report.to_json() + "\n")
    (out / "ablation.md").write_text(report.to_markdown() + "\n")
    print(report.to_markdown())
    return 0 if report.ok else 1


def _cmd_baseline(args) -> int:
    spec = DatasetSpec(d=args.digits, n=args.count, seed=args.seed)
    splits = split_dataset(generate_dataset(spec), DEFAULT_RATIOS, DEFAULT_SPLIT_SEED)
    report = constant_baseline(args.digits, splits.validation)
    print(report.to_json(indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="digitfreq",
        description="Digit-frequency counting benchmark: datasets, models, suites, probes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a dataset CSV plus manifest")
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--count", type=int, default=DEFAULT_N)
    p.add_argument("--seed", type=int, default=DEFAULT_DATASET_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--encoding", choices=[e.value for e in Encoding], default=Encoding.ORIGINAL.value)
    p.add_argument("--no-leading-zeros", action="store_true",
                   help="restrict sampling to numbers without leading zeros")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("suite", help="run methods x runs on one dataset and emit tables")
    p.add_argument("--dataset", required=True, help="CSV written by `generate`")
    p.add_argument("--split", choices=["val", "test", "train"], default="val")
    p.add_argument("--methods", default="all", help="comma list of DT1,DT2,RF1,RF2,NN,NN_EMB")
    p.add_argument("--runs", type=int, default=None,
                   help="default 5 for val, 1 for test")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("train", help="train one method and save the model")
    p.add_argument("--method", required=True, choices=[m.value for m in MethodId])
    p.add_argument("--config", default=None, help="JSON experiment config")
    p.add_argument("--digits", type=int, default=6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("probe", help="query saved models on hand-picked numbers")
    p.add_argument("--models", required=True, help="directory of saved model JSON files")
    p.add_argument("--numbers", required=True, help="comma list, consecutive entries form pairs")
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("inspect-tree", help="print the first nodes of a saved tree")
    p.add_argument("--model", required=True)
    p.add_argument("--nodes", type=int, default=6)
    p.set_defaults(func=_cmd_inspect_tree)

    p = sub.add_parser("ablate", help="run a hyperparameter grid on the test split")
    p.add_argument("--grid", required=True, help="JSON grid file, or 'preset' for the built-in cells")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("baseline", help="constant d/10 baseline metrics")
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--count", type=int, default=DEFAULT_N)
    p.add_argument("--seed", type=int, default=DEFAULT_DATASET_SEED)
    p.set_defaults(func=_cmd_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DataIntegrityError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
