import math

import numpy as np
import pytest
import scipy.stats

from greataudit import (
    DataValidationError,
    MetricUndefinedError,
    SCORE_SCALE,
    concentration_bound,
    coverage_experiment,
    per_class_epsilon,
    ranks,
    rdi_epsilon,
    required_samples,
    spearman,
)


class TestRanks:
    def test_simple(self):
        assert ranks([10.0, 30.0, 20.0]).tolist() == [1.0, 3.0, 2.0]

    def test_ties_average(self):
        assert ranks([5.0, 1.0, 5.0]).tolist() == [2.5, 1.0, 2.5]

    def test_rejects_nan(self):
        with pytest.raises(DataValidationError):
            ranks([1.0, np.nan])


class TestSpearman:
    def test_matches_scipy(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 60))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            # inject ties half the time
            if rng.random() < 0.5:
                x = np.round(x, 1)
                y = np.round(y, 1)
            if np.ptp(x) == 0 or np.ptp(y) == 0:
                continue
            ref = scipy.stats.spearmanr(x, y).statistic
            assert spearman(x, y) == pytest.approx(ref, abs=1e-12)

    def test_perfect_agreement_is_exactly_one(self):
        x = [1.0, 2.0, 3.0, 4.0]
        y = [10.0, 20.0, 30.0, 40.0]
        assert spearman(x, y) == 1.0
        assert spearman(x, y[::-1]) == -1.0

    def test_shortcut_with_ties(self):
        # tied ranks on both sides in the same places: still exactly 1
        assert spearman([1.0, 2.0, 2.0, 3.0], [5.0, 7.0, 7.0, 9.0]) == 1.0

    def test_constant_vector_is_undefined(self):
        with pytest.raises(MetricUndefinedError):
            spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_shape_mismatch(self):
        with pytest.raises(DataValidationError):
            spearman([1.0, 2.0], [1.0, 2.0, 3.0])


class TestEpsilon:
    # hand-frozen oracle values, computed from the closed form
    # sqrt(pi * ln(2K/delta) / (4n)) with 50-digit arithmetic
    def test_frozen_values(self):
        assert per_class_epsilon(1000, 10, 0.05) == pytest.approx(
            0.06859799742965922, abs=1e-16)
        assert per_class_epsilon(50, 1000, 0.05) == pytest.approx(
            0.4079847413217133, abs=1e-15)

    def test_rdi_is_exactly_double(self):
        for n, k, d in [(1000, 10, 0.05), (50, 1000, 0.05), (7, 2, 0.3)]:
            assert rdi_epsilon(n, k, d) == 2.0 * per_class_epsilon(n, k, d)

    def test_monotone_in_n(self):
        eps = [per_class_epsilon(n, 10, 0.05) for n in (10, 100, 1000, 10000)]
        assert eps == sorted(eps, reverse=True)

    def test_grows_with_k_shrinks_with_delta(self):
        assert per_class_epsilon(100, 100, 0.05) > per_class_epsilon(100, 10, 0.05)
        assert per_class_epsilon(100, 10, 0.01) > per_class_epsilon(100, 10, 0.2)

    def test_quarter_n_doubles_epsilon(self):
        assert per_class_epsilon(250, 10, 0.05) == pytest.approx(
            2.0 * per_class_epsilon(1000, 10, 0.05), rel=1e-12)

    def test_validation(self):
        with pytest.raises(DataValidationError):
            per_class_epsilon(0, 10, 0.05)
        with pytest.raises(DataValidationError):
            per_class_epsilon(10, 10, 1.5)


class TestRequiredSamples:
    def test_inverse_at_reporting_threshold(self):
        n = required_samples(0.069, 10, 0.05)
        assert n == 989
        # the defining inequality must be tight at the returned n
        assert per_class_epsilon(n, 10, 0.05) <= 0.069
        assert per_class_epsilon(n - 1, 10, 0.05) > 0.069

    def test_round_trip_many(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 200))
            d = float(rng.uniform(0.01, 0.3))
            target = float(rng.uniform(0.01, 1.0))
            n = required_samples(target, k, d)
            assert per_class_epsilon(n, k, d) <= target
            assert n == 1 or per_class_epsilon(n - 1, k, d) > target

    def test_huge_epsilon_needs_one_sample(self):
        assert required_samples(10.0, 10, 0.05) == 1


class TestConcentrationBound:
    def test_vector_bound(self):
        b = concentration_bound([1000, 500, 2000], 0.05)
        assert b.num_classes == 3
        assert b.n_min == 500
        assert b.simultaneous_epsilon == per_class_epsilon(500, 3, 0.05)
        assert b.rdi_epsilon == 2.0 * b.simultaneous_epsilon
        assert b.per_class_epsilons[1] == b.simultaneous_epsilon

    def test_rejects_zero_counts(self):
        with pytest.raises(DataValidationError):
            concentration_bound([100, 0], 0.05)


class TestCoverage:
    def test_point_mass_never_violates(self):
        res = coverage_experiment("point_mass", 5, 20, 0.05, trials=500, seed=1)
        assert res.violations == 0
        assert res.coverage == 1.0

    def test_uniform_coverage_exceeds_guarantee(self):
        res = coverage_experiment("uniform", 3, 200, 0.05, trials=2000, seed=7)
        assert res.coverage >= 1.0 - res.delta
        # Hoeffding is loose; observed coverage should in fact be ~1
        assert res.coverage >= 0.99

    def test_bernoulli_is_the_worst_case(self):
        # variance of the two-point distribution saturates the bound, so it
        # must produce at least as many violations as the uniform draw
        kwargs = dict(num_classes=2, n_per_class=10, delta=0.4,
                      trials=4000, seed=3)
        bern = coverage_experiment("bernoulli_extremes", **kwargs)
        unif = coverage_experiment("uniform", **kwargs)
        assert bern.coverage >= 1.0 - bern.delta
        assert bern.violations >= unif.violations

    def test_unknown_distribution(self):
        with pytest.raises(DataValidationError):
            coverage_experiment("gaussian", 2, 10, 0.05, trials=10)


def test_scale_constant_consistency():
    # the bound derivation assumes scores live in [0, sqrt(pi/2)]
    assert SCORE_SCALE == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-16)
