import math

import numpy as np
import pytest

from mclab.evaluation import (
    AggregateRecord,
    TrialRecord,
    aggregate,
    classify,
    log_nrmse,
    nrmse,
)


def record(scheme="uniform", solver="gnmr", r=2, trial=0, error=1e-6, **kw):
    return TrialRecord.from_error(scheme, solver, 100, 100, r, trial, 12345, 0.5,
                                  error, 10, 100.0, **kw)


class TestNrmse:
    def test_identity(self):
        X = np.random.default_rng(0).standard_normal((5, 5))
        assert nrmse(X, X) == 0.0

    def test_zero_estimate_normalizes_to_one(self):
        X = np.random.default_rng(1).standard_normal((4, 6))
        assert nrmse(np.zeros_like(X), X) == pytest.approx(1.0, rel=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        Xh = rng.standard_normal((5, 5))
        Xs = rng.standard_normal((5, 5))
        base = nrmse(Xh, Xs)
        for c in (2.0, -0.3, 17.5):
            assert nrmse(c * Xh, c * Xs) == pytest.approx(base, rel=1e-12)

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(3)
        Xh = rng.standard_normal((6, 6))
        Xs = rng.standard_normal((6, 6))
        Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        assert nrmse(Q @ Xh, Q @ Xs) == pytest.approx(nrmse(Xh, Xs), rel=1e-12)

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError, match="zero matrix"):
            nrmse(np.ones((2, 2)), np.zeros((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            nrmse(np.ones((2, 2)), np.ones((3, 3)))


class TestClassify:
    def test_threshold_rule(self):
        assert classify(1e-5)
        assert not classify(1e-4)
        assert classify(0.0)
        assert not classify(1.0)

    def test_log_sentinel_for_exact_zero(self):
        assert log_nrmse(0.0) == -16.0
        assert log_nrmse(1e-3) == pytest.approx(-3.0)


class TestTrialRecord:
    def test_success_consistency_enforced(self):
        rec = record(error=1e-5)
        assert rec.success
        with pytest.raises(ValueError, match="inconsistent"):
            TrialRecord(scheme="uniform", solver="gnmr", m=10, n=10, r=1, trial=0,
                        seed=1, observed_fraction=0.5, nrmse=1.0, log_nrmse=0.0,
                        success=True, outer_iterations=1, runtime_ms=1.0)

    def test_infinite_error_record(self):
        rec = record(error=math.inf)
        assert not rec.success
        assert math.isinf(rec.log_nrmse)


class TestAggregate:
    def test_singleton_group(self):
        [agg] = aggregate([record(error=1e-6)])
        assert agg.trial_count == 1
        assert agg.median_log_nrmse == pytest.approx(-6.0)
        assert agg.mean_log_nrmse == pytest.approx(-6.0)
        assert agg.success_rate == 1.0

    def test_all_success_rate(self):
        recs = [record(trial=t, error=1e-8) for t in range(4)]
        [agg] = aggregate(recs)
        assert agg.success_rate == 1.0

    def test_hand_computed_median_and_mean(self):
        recs = [record(trial=0, error=1e-2), record(trial=1, error=1e-4),
                record(trial=2, error=1e-12)]
        [agg] = aggregate(recs)
        assert agg.median_log_nrmse == pytest.approx(-4.0)
        assert agg.mean_log_nrmse == pytest.approx((-2.0 - 4.0 - 12.0) / 3.0)
        assert agg.success_rate == pytest.approx(1.0 / 3.0)

    def test_permutation_invariance(self):
        recs = [record(trial=t, error=e) for t, e in enumerate((1e-1, 1e-5, 1e-9, 2e-4))]
        fwd = aggregate(recs)
        rev = aggregate(list(reversed(recs)))
        assert fwd == rev

    def test_groups_sorted_and_separate(self):
        recs = [record(solver="gnmr", error=1e-9), record(solver="fpca", error=1e-1),
                record(scheme="relu", solver="gnmr", error=1e-2)]
        aggs = aggregate(recs)
        keys = [(a.scheme, a.solver) for a in aggs]
        assert keys == sorted(keys)
        assert len(aggs) == 3

    def test_infinite_errors_excluded_from_stats(self):
        recs = [record(trial=0, error=math.inf), record(trial=1, error=1e-6)]
        [agg] = aggregate(recs)
        assert agg.median_log_nrmse == pytest.approx(-6.0)
        assert agg.success_rate == 0.5

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="no records"):
            aggregate([])
