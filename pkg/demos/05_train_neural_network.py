"""Train the dense networks from scratch and emit their loss curves.

Runs the benchmark network (three ReLU layers, Adam under a one-cycle rate
policy, 16 epochs) on the 6-digit data, with and without the shared 10x100
digit embedding, then writes `epoch,train_mse,val_mse` CSVs you can plot.

Run:  python demos/05_train_neural_network.py [--count N] [--epochs E]
(the full protocol takes a couple of minutes; use --count 20000 for a quick look)
"""

import argparse
import time
from pathlib import Path

from digitfreq import DatasetSpec, MlpConfig, evaluate, generate_dataset, predict_nn, split_dataset, train
from digitfreq.harness import emit_loss_curves

parser = argparse.ArgumentParser()
parser.add_argument("--count", type=int, default=150_000)
parser.add_argument("--epochs", type=int, default=16)
parser.add_argument("--out", default="demo_output")
args = parser.parse_args()

out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

dataset = generate_dataset(DatasetSpec(d=6, n=args.count, seed=1234))
splits = split_dataset(dataset, (0.6, 0.2, 0.2), seed=5678)

for use_embedding in (False, True):
    name = "with embedding" if use_embedding else "plain"
    config = MlpConfig(
        d=6,
        hidden_layers=(96, 96, 96),
        learning_rate=0.01,
        epochs=args.epochs,
        use_embedding=use_embedding,
        seed=7,
        lr_schedule="one_cycle",
    )
    t0 = time.time()
    model, history = train(config, splits.train, splits.validation)
    report = evaluate(splits.test.targets(), predict_nn(model, splits.test), d=6)
    print(f"\n=== network ({name}) ===")
    print(f"test rmse {report.rmse:.3f}  mae {report.mae:.3f}  acc {100 * report.accuracy:.3f}%"
          f"  ({time.time() - t0:.0f}s)")
    print("epoch  train_mse  val_mse")
    for epoch, (tr, va) in enumerate(zip(history.train_mse, history.val_mse), start=1):
        print(f"{epoch:5d}  {tr:9.4f}  {va:7.4f}")
    curve = emit_loss_curves(history, out / f"loss_{'emb' if use_embedding else 'plain'}_6digit.csv")
    print(f"loss curve written to {curve}")
