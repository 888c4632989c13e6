"""Probe trained models on consecutive numbers.

999998 and 999999 have very different count vectors, but models that split
on the numeric value of the number put both into the same leaf interval and
answer identically.  The networks, reading digits, tell them apart.

Run:  python demos/06_special_cases.py [--count N]
"""

import argparse

from digitfreq import DatasetSpec, MlpConfig
from digitfreq.harness import ExperimentConfig, MethodId, prepare_splits, probe_special_cases, train_method

parser = argparse.ArgumentParser()
parser.add_argument("--count", type=int, default=150_000)
args = parser.parse_args()

dataset = DatasetSpec(d=6, n=args.count, seed=1234)
numbers = [999998, 999999, 100000, 100001]

models = {}
for method in (MethodId.DT1, MethodId.DT2, MethodId.NN):
    config = ExperimentConfig(method=method, dataset=dataset, seed=0)
    if method is MethodId.NN:
        config = ExperimentConfig(
            method=method, dataset=dataset, seed=0,
            mlp=MlpConfig(d=6, hidden_layers=(96, 96, 96), epochs=4, seed=7, lr_schedule="one_cycle"),
        )
    print(f"training {method.value} ...")
    models[method.value] = train_method(config, prepare_splits(config))

report = probe_special_cases(models, numbers)
for result in report.results:
    print(
        f"{result.method.value:4s} {result.number:6d}  "
        f"predicted {result.classified.tolist()}  truth {result.truth.tolist()}"
    )
print("\nidentical raw predictions per consecutive pair:")
for method, flags in report.pair_identical.items():
    for pair, identical in flags.items():
        print(f"  {method:4s} {pair}: {identical}")
