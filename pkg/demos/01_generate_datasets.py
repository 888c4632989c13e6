"""Build the two benchmark datasets and look at them.

Generates 6-digit and 10-digit datasets (150,000 uniformly drawn numbers
each, leading zeros allowed), shows the first rows in both encodings, splits
60:20:20, and writes CSVs with their manifests.

Run:  python demos/01_generate_datasets.py [--count N] [--out DIR]
"""

import argparse
from pathlib import Path

from digitfreq import DatasetSpec, Encoding, encode, generate_dataset, split_dataset, write_dataset

parser = argparse.ArgumentParser()
parser.add_argument("--count", type=int, default=150_000)
parser.add_argument("--out", default="demo_output")
args = parser.parse_args()

out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

for d in (6, 10):
    spec = DatasetSpec(d=d, n=args.count, seed=1234)
    dataset = generate_dataset(spec)
    print(f"\n=== {d}-digit dataset: {len(dataset)} samples ===")

    # the single-column view: count columns plus the number itself
    print("first rows (counts of digits 0..9, then the number):")
    for i in range(3):
        sample = dataset[i]
        print(f"  {list(sample.counts)}  {sample.as_string()}")

    # the per-digit view used by the stronger models
    X = encode(dataset, Encoding.MODIFIED)
    print(f"digit-column encoding shape: {X.shape}; row 0 = {X[0].astype(int).tolist()}")

    splits = split_dataset(dataset, (0.6, 0.2, 0.2), seed=5678)
    print(f"60:20:20 split sizes: {splits.sizes}")

    # every label is the exact histogram of its digits, and sums to d
    assert (dataset.counts.sum(axis=1) == d).all()

    path = out / f"digits{d}.csv"
    write_dataset(dataset, Encoding.ORIGINAL, path, split_ratios=(0.6, 0.2, 0.2), split_seed=5678)
    print(f"wrote {path} (+ manifest)")
