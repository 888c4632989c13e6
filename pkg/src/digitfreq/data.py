"""Synthetic digit-count datasets.

A sample is a d-digit string (leading zeros allowed, so the universe is all
10^d strings) paired with its length-10 digit histogram.  This module
generates the 6-digit and 10-digit benchmark sets, splits them 60:20:20,
produces the two feature encodings, and round-trips everything through CSV.

Encodings:
  ORIGINAL  one numeric column holding the whole number,
  MODIFIED  one column per digit position (Digit 1 = most significant).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DataIntegrityError

__all__ = [
    "Encoding",
    "DatasetSpec",
    "DigitSample",
    "DigitDataset",
    "SplitDataset",
    "count_digits",
    "count_digit_rows",
    "generate_dataset",
    "split_dataset",
    "encode",
    "write_dataset",
    "read_dataset",
    "digits_from_int",
    "ints_from_digit_rows",
]

PAPER_DIGIT_LENGTHS = (6, 10)
NUM_CLASSES = 10

COUNT_HEADER = [f"Count of digit {j}" for j in range(NUM_CLASSES)]


class Encoding(str, Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"


@dataclass(frozen=True)
class DatasetSpec:
    """Generation recipe: digit length, sample count, RNG seed.

    ``leading_zeros=False`` restricts sampling to [10^(d-1), 10^d - 1]; the
    default samples uniformly over all 10^d zero-padded strings.
    """

    d: int
    n: int
    seed: int
    leading_zeros: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"sample count must be >= 1, got {self.n}")
        if self.d < 1:
            raise ConfigurationError(f"digit length must be >= 1, got {self.d}")

    @property
    def is_paper_profile(self) -> bool:
        return self.d in PAPER_DIGIT_LENGTHS


@dataclass(frozen=True)
class DigitSample:
    """One number as a digit sequence plus its ground-truth count vector."""

    digits: tuple
    counts: tuple

    @property
    def d(self) -> int:
        return len(self.digits)

    @property
    def value(self) -> int:
        return int("".join(str(v) for v in self.digits))

    def as_string(self) -> str:
        return "".join(str(v) for v in self.digits)


class DigitDataset:
    """Column store for a batch of samples: digits (n, d) and counts (n, 10)."""

    def __init__(self, digits: np.ndarray, counts: np.ndarray, spec: DatasetSpec | None = None):
        digits = np.asarray(digits, dtype=np.uint8)
        counts = np.asarray(counts, dtype=np.uint8)
        if digits.ndim != 2:
            raise ConfigurationError("digits must be a 2-D array of shape (n, d)")
        if counts.shape != (digits.shape[0], NUM_CLASSES):
            raise ConfigurationError(
                f"counts shape {counts.shape} does not match {digits.shape[0]} samples x {NUM_CLASSES} classes"
            )
        if digits.size and digits.max() > 9:
            raise ConfigurationError("digits must lie in [0, 9]")
        self.digits = digits
        self.counts = counts
        self.spec = spec

    @property
    def d(self) -> int:
        return self.digits.shape[1]

    def __len__(self) -> int:
        return self.digits.shape[0]

    def __getitem__(self, i: int) -> DigitSample:
        return DigitSample(tuple(int(v) for v in self.digits[i]), tuple(int(v) for v in self.counts[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def take(self, indices: np.ndarray) -> "DigitDataset":
        return DigitDataset(self.digits[indices], self.counts[indices], self.spec)

    def values(self) -> np.ndarray:
        """The numbers as int64 scalars (exact for d <= 15)."""
        return ints_from_digit_rows(self.digits)

    def targets(self) -> np.ndarray:
        return self.counts.astype(np.float64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DigitDataset):
            return NotImplemented
        return np.array_equal(self.digits, other.digits) and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class SplitDataset:
    train: DigitDataset
    validation: DigitDataset
    test: DigitDataset
    ratios: tuple
    seed: int

    def __post_init__(self):
        sizes = (len(self.train), len(self.validation), len(self.test))
        if min(sizes) < 0 or sum(sizes) == 0:
            raise ConfigurationError("split partitions cannot all be empty")

    @property
    def sizes(self) -> tuple:
        return (len(self.train), len(self.validation), len(self.test))

    def split(self, name: str) -> DigitDataset:
        try:
            return {"train": self.train, "validation": self.validation, "test": self.test}[name]
        except KeyError:
            raise ConfigurationError(f"unknown split {name!r}") from None


def count_digits(number: Sequence[int]) -> np.ndarray:
    """Histogram of a single digit sequence: entry j counts occurrences of j."""
    digits = np.asarray(number, dtype=np.int64)
    if digits.ndim != 1 or digits.size == 0:
        raise ConfigurationError("a digit string is a non-empty 1-D sequence")
    if digits.min() < 0 or digits.max() > 9:
        raise ConfigurationError("digits must lie in [0, 9]")
    return np.bincount(digits, minlength=NUM_CLASSES).astype(np.int64)


def count_digit_rows(digits: np.ndarray) -> np.ndarray:
    """Row-wise digit histograms for a (n, d) digit matrix."""
    digits = np.asarray(digits)
    counts = np.empty((digits.shape[0], NUM_CLASSES), dtype=np.uint8)
    for j in range(NUM_CLASSES):
        counts[:, j] = (digits == j).sum(axis=1)
    return counts


def digits_from_int(value: int, d: int) -> np.ndarray:
    """Zero-padded digit expansion of ``value`` to width ``d``."""
    if value < 0 or value >= 10**d:
        raise ConfigurationError(f"{value} is not a {d}-digit number (leading zeros implied)")
    text = str(value).zfill(d)
    return np.array([int(c) for c in text], dtype=np.uint8)


def ints_from_digit_rows(digits: np.ndarray) -> np.ndarray:
    d = digits.shape[1]
    weights = 10 ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return digits.astype(np.int64) @ weights


def generate_dataset(spec: DatasetSpec) -> DigitDataset:
    """Draw ``spec.n`` digit strings uniformly (with replacement) and label them.

    Pure function of the spec: a fixed seed reproduces the byte-identical
    sample sequence.
    """
    rng = np.random.default_rng(spec.seed)
    digits = rng.integers(0, 10, size=(spec.n, spec.d), dtype=np.uint8)
    if not spec.leading_zeros:
        digits[:, 0] = rng.integers(1, 10, size=spec.n, dtype=np.uint8)
    return DigitDataset(digits, count_digit_rows(digits), spec)


def split_dataset(dataset: DigitDataset, ratios: Sequence[float], seed: int) -> SplitDataset:
    """Seeded shuffle, then partition by floor-allocated ratios.

    Validation and test sizes are floored; any remainder goes to train, so
    150,000 samples at 60:20:20 give exactly 90,000 / 30,000 / 30,000.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or min(ratios) < 0:
        raise ConfigurationError(f"need three non-negative ratios, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigurationError(f"ratios must sum to 1 within 1e-9, got sum {sum(ratios)!r}")
    n = len(dataset)
    if n == 0:
        raise ConfigurationError("cannot split an empty dataset")

    n_val = int(np.floor(n * ratios[1]))
    n_test = int(np.floor(n * ratios[2]))
    n_train = n - n_val - n_test

    order = np.random.default_rng(seed).permutation(n)
    train_idx = order[:n_train]
    val_idx = order[n_train : n_train + n_val]
    test_idx = order[n_train + n_val :]
    return SplitDataset(
        train=dataset.take(train_idx),
        validation=dataset.take(val_idx),
        test=dataset.take(test_idx),
        ratios=ratios,
        seed=seed,
    )


def encode(samples: DigitDataset | Iterable[DigitSample], encoding: Encoding | str) -> np.ndarray:
    """Feature matrix for a batch of samples.

    ORIGINAL gives an (n, 1) matrix of the numbers themselves (exact in
    float64 for d <= 15); MODIFIED gives an (n, d) matrix of digits in
    sample order.
    """
    encoding = Encoding(encoding)
    if isinstance(samples, DigitDataset):
        digits = samples.digits
    else:
        rows = [np.asarray(s.digits, dtype=np.uint8) for s in samples]
        if not rows:
            return np.empty((0, 1 if encoding is Encoding.ORIGINAL else 0))
        widths = {r.size for r in rows}
        if len(widths) != 1:
            raise ConfigurationError(f"mixed digit lengths in one batch: {sorted(widths)}")
        digits = np.stack(rows)
    if encoding is Encoding.ORIGINAL:
        return ints_from_digit_rows(digits).astype(np.float64).reshape(-1, 1)
    return digits.astype(np.float64)


def encode_number(value: int, d: int, encoding: Encoding | str) -> np.ndarray:
    """Single-number feature row matching :func:`encode`."""
    digits = digits_from_int(value, d)
    if Encoding(encoding) is Encoding.ORIGINAL:
        return np.array([[float(value)]])
    return digits.astype(np.float64).reshape(1, -1)


def _header_for(encoding: Encoding, d: int) -> list:
    if encoding is Encoding.ORIGINAL:
        return COUNT_HEADER + ["Number"]
    return COUNT_HEADER + [f"Digit {p}" for p in range(1, d + 1)]


def _manifest_path(path: Path) -> Path:
    return path.with_name(path.name + ".manifest.json")


def write_dataset(
    dataset: DigitDataset,
    encoding: Encoding | str,
    path,
    *,
    split_ratios=None,
    split_seed=None,
) -> Path:
    """Write the dataset as CSV plus a sidecar JSON manifest.

    Numbers are serialized zero-padded to width d, so leading zeros survive
    the round trip.
    """
    encoding = Encoding(encoding)
    path = Path(path)
    d = dataset.d
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_header_for(encoding, d))
        for digits_row, counts_row in zip(dataset.digits, dataset.counts):
            counts = [int(c) for c in counts_row]
            if encoding is Encoding.ORIGINAL:
                writer.writerow(counts + ["".join(str(int(v)) for v in digits_row)])
            else:
                writer.writerow(counts + [int(v) for v in digits_row])
    spec = dataset.spec
    manifest = {
        "d": d,
        "n": len(dataset),
        "seed": spec.seed if spec else None,
        "encoding": encoding.value,
        "split_ratios": list(split_ratios) if split_ratios is not None else None,
        "split_seed": split_seed,
    }
    with open(_manifest_path(path), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


def read_dataset(path) -> DigitDataset:
    """Load a CSV written by :func:`write_dataset`, verifying every row.

    Each row's stored counts must equal the histogram recomputed from its
    digits; a mismatch raises :class:`DataIntegrityError` naming the row.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataIntegrityError(f"{path}: empty file") from None
        if header[:NUM_CLASSES] != COUNT_HEADER:
            raise DataIntegrityError(f"{path}: malformed header {header[:NUM_CLASSES]!r}")
        tail = header[NUM_CLASSES:]
        if tail == ["Number"]:
            encoding = Encoding.ORIGINAL
        elif tail and all(col == f"Digit {p}" for p, col in enumerate(tail, start=1)):
            encoding = Encoding.MODIFIED
        else:
            raise DataIntegrityError(f"{path}: malformed header tail {tail!r}")

        digit_rows = []
        count_rows = []
        d = None
        for row_index, row in enumerate(reader):
            counts = [int(v) for v in row[:NUM_CLASSES]]
            if encoding is Encoding.ORIGINAL:
                text = row[NUM_CLASSES]
                if d is None:
                    d = len(text)
                digits = [int(c) for c in text]
            else:
                digits = [int(v) for v in row[NUM_CLASSES:]]
                if d is None:
                    d = len(digits)
            if len(digits) != d:
                raise DataIntegrityError(f"{path}: row {row_index} has {len(digits)} digits, expected {d}")
            if np.bincount(np.array(digits), minlength=NUM_CLASSES).tolist() != counts:
                raise DataIntegrityError(
                    f"{path}: row {row_index} counts {counts} do not match digits {digits}"
                )
            digit_rows.append(digits)
            count_rows.append(counts)

    if not digit_rows:
        raise DataIntegrityError(f"{path}: no data rows")

    spec = None
    manifest_path = _manifest_path(path)
    if manifest_path.exists():
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        if manifest.get("seed") is not None:
            spec = DatasetSpec(d=manifest["d"], n=manifest["n"], seed=manifest["seed"])
        if manifest.get("d") != d:
            raise DataIntegrityError(f"{path}: manifest d={manifest.get('d')} but file has d={d}")

    return DigitDataset(
        np.array(digit_rows, dtype=np.uint8),
        np.array(count_rows, dtype=np.uint8),
        spec,
    )
