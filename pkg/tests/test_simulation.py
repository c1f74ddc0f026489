import math

import numpy as np
import pytest

from tchar.distributions import DistributionModel, normal, qfamily, student_t, uniform
from tchar.errors import DomainError, InsufficientDataError, MomentError, RankError
from tchar.simulation import (
    AboveAvgDeviation,
    BelowAvgDeviation,
    RegressionEstimate,
    SampleMean,
    SquaredSpacingDifference,
    WeightedTheorem1,
    compare_report,
    simulate_regression,
    statistic_values,
    theoretical_value,
)


def _fake(emp, th, se):
    nb = len(emp)
    return RegressionEstimate(
        bin_edges=list(np.linspace(0, 1, nb + 1)),
        bin_centers=list(np.linspace(0.05, 0.95, nb)),
        counts=[100] * nb,
        empirical_mean=list(emp),
        std_err=list(se),
        theoretical=list(th),
        z_scores=[(e - t) / s for e, t, s in zip(emp, th, se)],
    )


class TestStatistics:
    def test_values(self):
        ordered = np.array([[1.0, 2.0, 4.0, 7.0]])
        assert statistic_values(BelowAvgDeviation(1), ordered, 3)[0] == pytest.approx(2.5)
        assert statistic_values(BelowAvgDeviation(2), ordered, 3)[0] == pytest.approx(6.5)
        assert statistic_values(AboveAvgDeviation(1), ordered, 2)[0] == pytest.approx(3.5)
        assert statistic_values(SampleMean(), ordered, 2)[0] == pytest.approx(3.5)
        assert statistic_values(WeightedTheorem1(0.25), ordered, 2)[0] == pytest.approx(0.25 * 1 - 0.75 * 3.5)
        # nu = 3: (m - x_i)^2 mean below minus above
        assert statistic_values(SquaredSpacingDifference(3), ordered, 2)[0] == pytest.approx(1.0 - 14.5)

    def test_kind_validation(self):
        with pytest.raises(DomainError):
            BelowAvgDeviation(3)
        with pytest.raises(DomainError):
            WeightedTheorem1(1.0)
        with pytest.raises(DomainError):
            SquaredSpacingDifference(2)

    def test_uniform_theory(self):
        assert theoretical_value(uniform(), 3, 2, BelowAvgDeviation(1), 0.6) == pytest.approx(0.3, abs=1e-12)
        assert theoretical_value(uniform(), 3, 2, SampleMean(), 0.6) == pytest.approx((0.6 + 0.3 + 0.8) / 3, abs=1e-12)

    def test_median_mean_is_x_for_t2(self):
        for x in (-3.0, 0.2, 5.0):
            assert theoretical_value(student_t(2), 3, 2, SampleMean(), x) == pytest.approx(x, abs=1e-10)


class TestCompare:
    def test_identical(self):
        res = compare_report(_fake([1.0] * 10, [1.0] * 10, [0.1] * 10))
        assert res.passed and res.pass_fraction == 1.0 and res.failing_bins == []
        assert res.checked_bins == list(range(1, 9))

    def test_shifted(self):
        res = compare_report(_fake([2.0] * 10, [1.0] * 10, [0.1] * 10))
        assert not res.passed
        assert res.failing_bins == list(range(1, 9))
        assert "bin 1" in res.summary

    def test_edges_excluded(self):
        emp = [1.0] * 10
        emp[0] = emp[-1] = 9.0
        assert compare_report(_fake(emp, [1.0] * 10, [0.1] * 10)).passed

    def test_fraction(self):
        emp = [1.0] * 22
        emp[5] = 2.0
        est = _fake(emp, [1.0] * 22, [0.1] * 22)
        assert compare_report(est, min_pass_fraction=0.95).passed
        assert not compare_report(est, min_pass_fraction=0.99).passed


class TestSimulate:
    def test_deterministic(self):
        a = simulate_regression(student_t(2), 3, 2, SampleMean(), 20_000, seed=7, bins=20)
        b = simulate_regression(student_t(2), 3, 2, SampleMean(), 20_000, seed=7, bins=20)
        assert a.to_dict() == b.to_dict()
        c = simulate_regression(student_t(2), 3, 2, SampleMean(), 20_000, seed=8, bins=20)
        assert a.empirical_mean != c.empirical_mean

    def test_chunking_independent_of_total(self):
        # the first chunk of a larger run equals a run of one chunk
        from tchar.simulation import CHUNK, _draw

        big = _draw(normal(), 3, CHUNK + 10, seed=2)
        small = _draw(normal(), 3, CHUNK, seed=2)
        np.testing.assert_array_equal(big[:CHUNK], small)

    def test_invariants(self):
        est = simulate_regression(normal(), 5, 3, BelowAvgDeviation(2), 30_000, seed=1, bins=30)
        assert sum(est.counts) == 30_000
        assert len(est.bin_edges) == 31
        for e, t, s, z in zip(est.empirical_mean, est.theoretical, est.std_err, est.z_scores):
            assert s > 0
            assert z == pytest.approx((e - t) / s)
        assert all(lo <= c <= hi for lo, c, hi in zip(est.bin_edges, est.bin_centers, est.bin_edges[1:]))

    def test_uniform_below_deviation(self):
        est = simulate_regression(uniform(), 3, 2, BelowAvgDeviation(1), 50_000, seed=3, bins=20)
        for x, t in zip(est.bin_centers, est.theoretical):
            assert t == pytest.approx(x / 2, abs=1e-12)
        assert compare_report(est).passed

    def test_t2_sample_mean_tracks_x(self):
        est = simulate_regression(student_t(2), 3, 2, SampleMean(), 200_000, seed=1)
        res = compare_report(est, 3.0, 0.95)
        assert res.passed, res.summary

    def test_t3_squared_spacings(self):
        est = simulate_regression(student_t(3), 3, 2, SquaredSpacingDifference(3), 200_000, seed=1)
        assert max(abs(t) for t in est.theoretical) < 1e-9
        res = compare_report(est, 3.0, 0.95)
        assert res.passed, res.summary

    def test_qfamily_weighted(self):
        # lambda = 1/2 keeps both tails at index 2; for other members one side of
        # the statistic has infinite variance and the per-bin z-scores drift
        est = simulate_regression(qfamily(0.5, 1.0, 3.0), 4, 2, WeightedTheorem1(0.5), 200_000, seed=0)
        assert max(abs(t) for t in est.theoretical) < 1e-8
        assert compare_report(est).passed

    def test_qfamily_light_side(self):
        est = simulate_regression(qfamily(0.3, 1.0, 0.0), 4, 2, AboveAvgDeviation(1), 100_000, seed=0, bins=20)
        assert compare_report(est).passed

    def test_median_symmetry(self):
        bl = simulate_regression(normal(), 5, 3, BelowAvgDeviation(1), 100_000, seed=3, bins=20)
        ab = simulate_regression(normal(), 5, 3, AboveAvgDeviation(1), 100_000, seed=3, bins=20)
        nb = len(bl.counts)
        for i in range(1, nb - 1):
            j = nb - 1 - i
            assert bl.bin_centers[i] == pytest.approx(-ab.bin_centers[j], abs=0.02)
            band = 3 * math.hypot(bl.std_err[i], ab.std_err[j])
            assert abs(bl.empirical_mean[i] - ab.empirical_mean[j]) <= band

    def test_root_n_consistency(self):
        def med(reps, seed):
            est = simulate_regression(uniform(), 3, 2, BelowAvgDeviation(1), reps, seed, bins=100)
            err = np.abs(np.subtract(est.empirical_mean, est.theoretical))[1:-1]
            return float(np.median(err))

        small = np.mean([med(50_000, s) for s in range(5)])
        large = np.mean([med(100_000, 1000 + s) for s in range(5)])
        assert 1.2 <= small / large <= 1.7

    def test_insufficient_data(self):
        # three atoms: equal-count edges collapse and most bins stay empty
        atoms = DistributionModel(
            name="atoms",
            pdf=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            cdf=lambda x: np.clip(np.floor(np.asarray(x, dtype=float) + 1) / 3, 0, 1),
            sf=lambda x: 1 - np.clip(np.floor(np.asarray(x, dtype=float) + 1) / 3, 0, 1),
            quantile=lambda u: np.floor(3 * np.asarray(u)),
            isf=lambda v: np.floor(3 * (1 - np.asarray(v))),
        )
        with pytest.raises(InsufficientDataError):
            simulate_regression(atoms, 3, 2, SampleMean(), 1000, seed=0, bins=10)

    def test_too_few_replications(self):
        with pytest.raises(DomainError):
            simulate_regression(normal(), 3, 2, SampleMean(), 499, seed=0, bins=50)

    def test_missing_moment(self):
        with pytest.raises(MomentError):
            simulate_regression(student_t(2), 3, 2, SquaredSpacingDifference(3), 10_000, seed=0, bins=10)
        with pytest.raises(MomentError):
            simulate_regression(qfamily(0.3, 1.0), 3, 2, BelowAvgDeviation(2), 10_000, seed=0, bins=10)
        # the upper tail of Q(0.3) has a second moment
        simulate_regression(qfamily(0.3, 1.0), 3, 2, AboveAvgDeviation(2), 10_000, seed=0, bins=10)

    def test_rank_checks(self):
        with pytest.raises(DomainError):
            simulate_regression(normal(), 3, 1, BelowAvgDeviation(1), 10_000, seed=0, bins=10)
        with pytest.raises(RankError):
            simulate_regression(normal(), 3, 4, SampleMean(), 10_000, seed=0, bins=10)
