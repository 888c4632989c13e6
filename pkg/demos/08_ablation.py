"""Alternative network hyperparameters on the test sets.

Replays the ablation cells (lower learning rates, wider layers) that were
reported to improve the regression metrics.  By default runs the cells at
reduced dataset size for a quick look; pass --full for the complete
150k-sample protocol (several minutes of training).

Run:  python demos/08_ablation.py [--full]
"""

import argparse
from dataclasses import replace

from digitfreq.harness import TABLE5_PRESET, run_ablation

parser = argparse.ArgumentParser()
parser.add_argument("--full", action="store_true", help="run the full 150k protocol")
args = parser.parse_args()

grid = TABLE5_PRESET if args.full else tuple(replace(cell, n=20_000) for cell in TABLE5_PRESET)
if not args.full:
    print("reduced protocol (20k samples per cell); pass --full for the real one\n")

report = run_ablation(grid)
print(report.to_markdown())
if not report.ok:
    raise SystemExit(1)
