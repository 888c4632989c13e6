"""Evaluation metrics: RMSE, MAE, and post-rounding accuracy.

All three average over every (sample, output) entry, i.e. divide by n*10.
Regression outputs become classification decisions through :func:`classify`,
which rounds to the nearest count and clamps into [0, d].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "rmse",
    "mae",
    "classify",
    "accuracy",
    "EvalReport",
    "evaluate",
    "aggregate_runs",
]

ROUNDING_MODES = ("half_away_from_zero", "half_to_even")


def _check_shapes(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.ndim == 1:
        y_true = y_true.reshape(1, -1)
    if y_pred.ndim == 1:
        y_pred = y_pred.reshape(1, -1)
    if y_true.shape != y_pred.shape:
        raise ConfigurationError(f"shape mismatch: targets {y_true.shape} vs predictions {y_pred.shape}")
    if y_true.shape[0] < 1:
        raise ConfigurationError("need at least one sample")
    return y_true, y_pred


def rmse(y_true, y_pred) -> float:
    """sqrt of the mean squared per-entry error."""
    y_true, y_pred = _check_shapes(y_true, y_pred)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def mae(y_true, y_pred) -> float:
    """Mean absolute per-entry error."""
    y_true, y_pred = _check_shapes(y_true, y_pred)
    return float(np.mean(np.abs(y_true - y_pred)))


def classify(y_pred, d: int, mode: str = "half_away_from_zero") -> np.ndarray:
    """Round raw count predictions to integers and clamp into [0, d].

    Ties round half away from zero by default (2.5 -> 3); the alternative
    ``half_to_even`` is provided because the convention is not forced by
    anything downstream.  Idempotent on its own output.
    """
    if d < 1:
        raise ConfigurationError(f"digit length must be >= 1, got {d}")
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if mode == "half_away_from_zero":
        rounded = np.sign(y_pred) * np.floor(np.abs(y_pred) + 0.5)
    elif mode == "half_to_even":
        rounded = np.rint(y_pred)
    else:
        raise ConfigurationError(f"unknown rounding mode {mode!r}; pick one of {ROUNDING_MODES}")
    return np.clip(rounded, 0, d)


def accuracy(y_true, y_pred_int) -> float:
    """Fraction of entries where the integer prediction equals the target."""
    y_true, y_pred_int = _check_shapes(y_true, y_pred_int)
    if not np.all(y_pred_int == np.floor(y_pred_int)):
        raise ConfigurationError("accuracy requires integer predictions; apply classify() first")
    return float(np.mean(y_true == y_pred_int))


@dataclass
class EvalReport:
    """One method's metrics, optionally aggregated over several runs.

    ``rmse``/``mae``/``accuracy`` hold the single-run value or the
    across-run mean; the ``*_std`` fields hold the sample (n-1) standard
    deviation, 0.0 when there is a single run.
    """

    rmse: float
    mae: float
    accuracy: float
    n: int
    rmse_std: float = 0.0
    mae_std: float = 0.0
    acc_std: float = 0.0
    runs: list = field(default_factory=list)
    model: str = ""
    dataset: str = ""
    split: str = ""

    @property
    def n_runs(self) -> int:
        return len(self.runs) if self.runs else 1

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "dataset": self.dataset,
            "split": self.split,
            "rmse_mean": self.rmse,
            "rmse_std": self.rmse_std,
            "mae_mean": self.mae,
            "mae_std": self.mae_std,
            "acc_mean": self.accuracy,
            "acc_std": self.acc_std,
            "runs": [list(r) for r in self.runs],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def format_row(self, with_std: bool = True) -> str:
        """Benchmark-table cell formatting: three decimals, accuracy in percent."""
        if with_std and len(self.runs) > 1:
            return (
                f"{self.rmse:.3f}±{self.rmse_std:.3f}\t"
                f"{self.mae:.3f}±{self.mae_std:.3f}\t"
                f"{100 * self.accuracy:.3f}%"
            )
        return f"{self.rmse:.3f}\t{self.mae:.3f}\t{100 * self.accuracy:.3f}%"


def evaluate(y_true, y_pred_raw, d: int, **meta) -> EvalReport:
    """RMSE/MAE on raw outputs plus accuracy after the rounding modification."""
    y_true, y_pred_raw = _check_shapes(y_true, y_pred_raw)
    return EvalReport(
        rmse=rmse(y_true, y_pred_raw),
        mae=mae(y_true, y_pred_raw),
        accuracy=accuracy(y_true, classify(y_pred_raw, d)),
        n=y_true.shape[0],
        **meta,
    )


def aggregate_runs(reports: Sequence[EvalReport]) -> EvalReport:
    """Mean and sample standard deviation across independent runs."""
    if len(reports) == 0:
        raise ConfigurationError("cannot aggregate zero runs")
    runs = [(r.rmse, r.mae, r.accuracy) for r in reports]
    values = np.array(runs, dtype=np.float64)
    means = values.mean(axis=0)
    stds = values.std(axis=0, ddof=1) if len(reports) > 1 else np.zeros(3)
    first = reports[0]
    return EvalReport(
        rmse=float(means[0]),
        mae=float(means[1]),
        accuracy=float(means[2]),
        n=first.n,
        rmse_std=float(stds[0]),
        mae_std=float(stds[1]),
        acc_std=float(stds[2]),
        runs=runs,
        model=first.model,
        dataset=first.dataset,
        split=first.split,
    )
