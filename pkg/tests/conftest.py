import numpy as np
import pytest

from digitfreq.data import DigitDataset, count_digit_rows


def dataset_from_values(values, d):
    """Build a DigitDataset from plain integers (test helper)."""
    digits = np.array([[int(c) for c in str(v).zfill(d)] for v in values], dtype=np.uint8)
    return DigitDataset(digits, count_digit_rows(digits))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
