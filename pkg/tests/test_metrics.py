"""Metric definitions, the rounding modification, and run aggregation."""

import math

import numpy as np
import pytest

from digitfreq.errors import ConfigurationError
from digitfreq.metrics import EvalReport, accuracy, aggregate_runs, classify, evaluate, mae, rmse

# the worked example pair: truth for 153236 vs a prediction missing both 1s
Y_EXAMPLE = [0, 1, 1, 2, 0, 1, 1, 0, 0, 0]
YHAT_EXAMPLE = [0, 0, 1, 2, 0, 0, 1, 0, 0, 0]


class TestRmseMae:
    def test_worked_example(self):
        assert rmse(Y_EXAMPLE, YHAT_EXAMPLE) == pytest.approx(math.sqrt(0.2), abs=1e-12)
        assert mae(Y_EXAMPLE, YHAT_EXAMPLE) == pytest.approx(0.2, abs=1e-12)

    def test_identity_is_zero(self, rng):
        Y = rng.integers(0, 7, size=(40, 10)).astype(float)
        assert rmse(Y, Y) == 0.0
        assert mae(Y, Y) == 0.0

    def test_unit_offset(self):
        assert rmse([0.0] * 10, [1.0] * 10) == pytest.approx(1.0)
        assert mae([0.0] * 10, [0.5] * 10) == pytest.approx(0.5)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            rmse(np.zeros((3, 10)), np.zeros((4, 10)))
        with pytest.raises(ConfigurationError):
            mae(np.zeros((3, 10)), np.zeros((3, 9)))

    def test_row_permutation_invariance(self, rng):
        Y = rng.normal(size=(30, 10))
        P = rng.normal(size=(30, 10))
        perm = rng.permutation(30)
        assert rmse(Y, P) == pytest.approx(rmse(Y[perm], P[perm]), abs=1e-15)
        assert mae(Y, P) == pytest.approx(mae(Y[perm], P[perm]), abs=1e-15)

    def test_scalar_loop_cross_check(self, rng):
        # independent scalar-loop implementation agrees to 1e-12
        for _ in range(25):
            n = int(rng.integers(1, 12))
            Y = rng.normal(size=(n, 10))
            P = rng.normal(size=(n, 10))
            sq = 0.0
            ab = 0.0
            for i in range(n):
                for j in range(10):
                    diff = Y[i, j] - P[i, j]
                    sq += diff * diff
                    ab += abs(diff)
            assert rmse(Y, P) == pytest.approx(math.sqrt(sq / (n * 10)), abs=1e-12)
            assert mae(Y, P) == pytest.approx(ab / (n * 10), abs=1e-12)


class TestClassify:
    def test_negative_rounds_up_to_zero(self):
        assert classify(np.array([-0.3]), d=6).tolist() == [0.0]

    def test_overflow_rounds_down_to_d(self):
        assert classify(np.array([6.4]), d=6).tolist() == [6.0]

    def test_half_away_from_zero_tie(self):
        assert classify(np.array([2.5]), d=10).tolist() == [3.0]
        assert classify(np.array([0.5]), d=10).tolist() == [1.0]
        assert classify(np.array([-0.5]), d=10).tolist() == [0.0]

    def test_half_to_even_mode(self):
        assert classify(np.array([2.5]), d=10, mode="half_to_even").tolist() == [2.0]

    def test_idempotent_and_in_range(self, rng):
        for d in (6, 10):
            raw = rng.normal(0, 4, size=(200, 10))
            once = classify(raw, d)
            assert np.array_equal(classify(once, d), once)
            assert once.min() >= 0 and once.max() <= d
            assert np.all(once == np.floor(once))

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigurationError):
            classify(np.array([1.0]), d=6, mode="stochastic")


class TestAccuracy:
    def test_worked_example_is_point_eight(self):
        assert accuracy(Y_EXAMPLE, YHAT_EXAMPLE) == 0.8

    def test_perfect_and_total_mismatch(self):
        Y = np.zeros((1, 10))
        assert accuracy(Y, Y) == 1.0
        assert accuracy(Y, np.ones((1, 10))) == 0.0

    def test_rejects_fractional_predictions(self):
        with pytest.raises(ConfigurationError):
            accuracy(np.zeros((1, 10)), np.full((1, 10), 0.5))


class TestEquivalences:
    def test_zero_metric_iff_equal(self, rng):
        Y = rng.integers(0, 7, size=(20, 10)).astype(float)
        P = Y.copy()
        P[3, 4] += 1
        assert rmse(Y, P) > 0 and mae(Y, P) > 0
        assert accuracy(Y, P) < 1.0
        assert accuracy(Y, classify(Y, 10)) == 1.0


class TestAggregateRuns:
    def _report(self, r, m, a):
        return EvalReport(rmse=r, mae=m, accuracy=a, n=100)

    def test_identical_reports_have_zero_std(self):
        agg = aggregate_runs([self._report(0.5, 0.2, 0.9)] * 5)
        assert agg.rmse_std == agg.mae_std == agg.acc_std == 0.0
        assert agg.rmse == 0.5 and len(agg.runs) == 5

    def test_hand_computed_sample_std(self):
        agg = aggregate_runs([self._report(0.1, 0.1, 0.9), self._report(0.2, 0.1, 0.9), self._report(0.3, 0.1, 0.9)])
        assert agg.rmse == pytest.approx(0.2, abs=1e-15)
        assert agg.rmse_std == pytest.approx(0.1, abs=1e-12)

    def test_single_report(self):
        agg = aggregate_runs([self._report(0.4, 0.3, 0.8)])
        assert agg.rmse == 0.4 and agg.rmse_std == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            aggregate_runs([])


class TestEvalReport:
    def test_json_fields(self):
        rep = evaluate(np.zeros((2, 10)), np.zeros((2, 10)), d=6, model="m", dataset="6-digit", split="test")
        payload = rep.to_dict()
        assert set(payload) == {
            "model", "dataset", "split",
            "rmse_mean", "rmse_std", "mae_mean", "mae_std", "acc_mean", "acc_std", "runs",
        }

    def test_percent_formatting(self):
        rep = EvalReport(rmse=0.5234, mae=0.25, accuracy=0.902061, n=10)
        assert rep.format_row() == "0.523\t0.250\t90.206%"
