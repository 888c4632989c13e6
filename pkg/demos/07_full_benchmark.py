"""Reproduce the benchmark tables end to end.

Runs all six methods on the requested dataset and split with per-method
run statistics, prints the markdown table, and writes JSON/markdown reports
plus network loss curves.

The full protocol (150k samples, 5 validation runs per method) takes tens
of minutes; the defaults here do one run per method.

Run:
  python demos/07_full_benchmark.py --digits 6 --split val --runs 1
  python demos/07_full_benchmark.py --digits 10 --split test
"""

import argparse
import time

from digitfreq import DatasetSpec
from digitfreq.harness import run_suite

parser = argparse.ArgumentParser()
parser.add_argument("--digits", type=int, default=6, choices=(6, 10))
parser.add_argument("--count", type=int, default=150_000)
parser.add_argument("--split", choices=("val", "test"), default="val")
parser.add_argument("--runs", type=int, default=1)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="demo_output")
args = parser.parse_args()

t0 = time.time()
report = run_suite(
    DatasetSpec(d=args.digits, n=args.count, seed=1234),
    n_runs=args.runs,
    seed=args.seed,
    eval_split="validation" if args.split == "val" else "test",
    split_seed=5678,
    out_dir=args.out,
)
print(report.to_markdown())
print(f"\ncompleted in {time.time() - t0:.0f}s; reports in {args.out}/")
if not report.ok:
    raise SystemExit(1)
