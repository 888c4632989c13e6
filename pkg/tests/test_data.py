"""Dataset generation, splitting, encoding, and CSV round trips."""

from collections import Counter

import numpy as np
import pytest
import scipy.stats

from digitfreq.data import (
    DatasetSpec,
    DigitDataset,
    Encoding,
    count_digits,
    digits_from_int,
    encode,
    generate_dataset,
    read_dataset,
    split_dataset,
    write_dataset,
)
from digitfreq.errors import ConfigurationError, DataIntegrityError

from conftest import dataset_from_values


def counting_oracle(digits):
    """Independent histogram via collections.Counter on the digit string."""
    c = Counter(str(int(v)) for v in digits)
    return [c.get(str(j), 0) for j in range(10)]


class TestCountDigits:
    def test_published_6digit_row(self):
        assert count_digits(digits_from_int(175322, 6)).tolist() == [0, 1, 2, 1, 0, 1, 0, 1, 0, 0]

    def test_published_10digit_row(self):
        assert count_digits(digits_from_int(6131146484, 10)).tolist() == [0, 3, 0, 1, 3, 0, 2, 0, 1, 0]

    def test_all_zero_string(self):
        assert count_digits([0] * 6).tolist() == [6, 0, 0, 0, 0, 0, 0, 0, 0, 0]

    def test_sums_to_d(self, rng):
        for _ in range(50):
            d = int(rng.integers(1, 15))
            digits = rng.integers(0, 10, size=d)
            counts = count_digits(digits)
            assert counts.sum() == d
            assert counts.tolist() == counting_oracle(digits)

    def test_rejects_bad_digits(self):
        with pytest.raises(ConfigurationError):
            count_digits([1, 2, 11])
        with pytest.raises(ConfigurationError):
            count_digits([])


class TestGenerate:
    def test_labels_match_oracle_and_sum(self):
        ds = generate_dataset(DatasetSpec(d=6, n=500, seed=42))
        assert len(ds) == 500
        assert np.all(ds.counts.sum(axis=1) == 6)
        for i in range(len(ds)):
            assert ds.counts[i].tolist() == counting_oracle(ds.digits[i])

    def test_deterministic(self):
        a = generate_dataset(DatasetSpec(d=10, n=200, seed=7))
        b = generate_dataset(DatasetSpec(d=10, n=200, seed=7))
        assert a == b

    def test_seed_changes_samples(self):
        a = generate_dataset(DatasetSpec(d=6, n=200, seed=1))
        b = generate_dataset(DatasetSpec(d=6, n=200, seed=2))
        assert a != b

    def test_rejects_bad_spec(self):
        with pytest.raises(ConfigurationError):
            DatasetSpec(d=6, n=0, seed=0)
        with pytest.raises(ConfigurationError):
            DatasetSpec(d=0, n=10, seed=0)

    def test_no_leading_zeros_flag(self):
        ds = generate_dataset(DatasetSpec(d=6, n=2000, seed=3, leading_zeros=False))
        assert ds.digits[:, 0].min() >= 1

    def test_digit_count_distribution_is_binomial(self):
        # count of digit j across samples ~ Binomial(d, 1/10), chi-square at 0.001
        ds = generate_dataset(DatasetSpec(d=10, n=150_000, seed=99))
        n, d = len(ds), 10
        pmf = np.array([scipy.stats.binom.pmf(c, d, 0.1) for c in range(d + 1)])
        for j in range(10):
            observed = np.bincount(ds.counts[:, j], minlength=d + 1).astype(float)
            # pool the sparse tail so expected counts stay reasonable
            observed_pooled = np.concatenate([observed[:5], [observed[5:].sum()]])
            expected = n * np.concatenate([pmf[:5], [pmf[5:].sum()]])
            stat, pvalue = scipy.stats.chisquare(observed_pooled, expected)
            assert pvalue > 0.001, f"digit {j}: chi2={stat:.1f} p={pvalue:.2e}"


class TestSplit:
    def test_paper_sizes(self):
        ds = generate_dataset(DatasetSpec(d=6, n=150_000, seed=5))
        sp = split_dataset(ds, (0.6, 0.2, 0.2), seed=11)
        assert sp.sizes == (90_000, 30_000, 30_000)

    def test_degenerate_ratio(self):
        ds = generate_dataset(DatasetSpec(d=6, n=10, seed=5))
        sp = split_dataset(ds, (1.0, 0.0, 0.0), seed=11)
        assert sp.sizes == (10, 0, 0)

    def test_partitions_disjoint_and_exhaustive(self):
        ds = generate_dataset(DatasetSpec(d=6, n=1000, seed=5))
        sp = split_dataset(ds, (0.5, 0.3, 0.2), seed=11)
        assert sp.sizes == (500, 300, 200)
        # partitions reassemble the exact multiset of samples
        seen = np.sort(np.concatenate([sp.train.values(), sp.validation.values(), sp.test.values()]))
        assert np.array_equal(seen, np.sort(ds.values()))

    def test_seed_changes_order_not_sizes(self):
        ds = generate_dataset(DatasetSpec(d=6, n=1000, seed=5))
        a = split_dataset(ds, (0.6, 0.2, 0.2), seed=1)
        b = split_dataset(ds, (0.6, 0.2, 0.2), seed=2)
        assert a.sizes == b.sizes
        assert not np.array_equal(a.train.digits, b.train.digits)

    def test_remainder_goes_to_train(self):
        ds = generate_dataset(DatasetSpec(d=6, n=7, seed=5))
        sp = split_dataset(ds, (0.6, 0.2, 0.2), seed=11)
        assert sp.sizes == (5, 1, 1)

    def test_bad_ratios_rejected(self):
        ds = generate_dataset(DatasetSpec(d=6, n=10, seed=5))
        with pytest.raises(ConfigurationError):
            split_dataset(ds, (0.5, 0.2, 0.2), seed=11)


class TestEncode:
    def test_original_single_number(self):
        ds = dataset_from_values([175322], d=6)
        assert encode(ds, Encoding.ORIGINAL).tolist() == [[175322.0]]

    def test_modified_single_number(self):
        ds = dataset_from_values([175322], d=6)
        assert encode(ds, Encoding.MODIFIED).tolist() == [[1, 7, 5, 3, 2, 2]]

    def test_leading_zero_expansion(self):
        ds = dataset_from_values([42], d=6)
        assert encode(ds, Encoding.MODIFIED).tolist() == [[0, 0, 0, 0, 4, 2]]
        assert encode(ds, Encoding.ORIGINAL).tolist() == [[42.0]]

    def test_mixed_digit_lengths_rejected(self):
        a = dataset_from_values([123456], d=6)[0]
        b = dataset_from_values([12345], d=5)[0]
        with pytest.raises(ConfigurationError):
            encode([a, b], Encoding.MODIFIED)

    def test_original_values_in_range(self):
        ds = generate_dataset(DatasetSpec(d=6, n=300, seed=0))
        X = encode(ds, Encoding.ORIGINAL)
        assert X.shape == (300, 1)
        assert X.min() >= 0 and X.max() <= 10**6 - 1
        assert np.all(X == np.floor(X))


class TestRoundTrip:
    @pytest.mark.parametrize("encoding", [Encoding.ORIGINAL, Encoding.MODIFIED])
    def test_write_read_identity(self, tmp_path, encoding):
        ds = generate_dataset(DatasetSpec(d=6, n=400, seed=21))
        path = tmp_path / "ds.csv"
        write_dataset(ds, encoding, path)
        back = read_dataset(path)
        assert back == ds
        assert back.spec is not None and back.spec.seed == 21

    def test_modified_10digit_header_width(self, tmp_path):
        ds = generate_dataset(DatasetSpec(d=10, n=5, seed=21))
        path = tmp_path / "ds.csv"
        write_dataset(ds, Encoding.MODIFIED, path)
        header = path.read_text().splitlines()[0].split(",")
        assert len(header) == 20
        assert header[10] == "Digit 1" and header[-1] == "Digit 10"

    def test_leading_zeros_survive(self, tmp_path):
        ds = dataset_from_values([123, 4], d=6)
        path = tmp_path / "ds.csv"
        write_dataset(ds, Encoding.ORIGINAL, path)
        text = path.read_text()
        assert "000123" in text and "000004" in text
        assert read_dataset(path) == ds

    def test_tampered_counts_detected(self, tmp_path):
        ds = generate_dataset(DatasetSpec(d=6, n=10, seed=21))
        path = tmp_path / "ds.csv"
        write_dataset(ds, Encoding.ORIGINAL, path)
        lines = path.read_text().splitlines()
        cells = lines[4].split(",")
        cells[0] = str((int(cells[0]) + 1) % 7)
        lines[4] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataIntegrityError, match="row 3"):
            read_dataset(path)

    def test_malformed_header_rejected(self, tmp_path):
        path = tmp_path / "ds.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(DataIntegrityError, match="header"):
            read_dataset(path)
