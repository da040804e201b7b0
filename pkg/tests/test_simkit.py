import math

import numpy as np
import pytest

from whlkit.errors import BadCase, BadParameters, InsufficientReplications
from whlkit.estimators import EstimatorKind
from whlkit.samples import PairScheme
from whlkit.simkit import (
    SENSITIVITY_KINDS,
    SENSITIVITY_N,
    ContaminationSpec,
    DistributionSpec,
    SampleSpec,
    generate_sample,
    inject_outliers,
    run_replications,
    sampler,
    sensitivity_case,
    sensitivity_sweep,
    table_sample,
    true_theta,
    true_var,
)

S = PairScheme.STRICT


class TestDistributions:
    def test_normal_mean_million_draws(self):
        draws = sampler(DistributionSpec.normal(0, 1), seed=1, count=10**6)
        assert abs(float(np.mean(draws))) < 0.004

    def test_uniform_support_and_mean(self):
        draws = sampler(DistributionSpec.uniform(50, 150), seed=2, count=10**6)
        assert draws.min() >= 50.0 and draws.max() < 150.0
        assert abs(float(np.mean(draws)) - 100.0) < 0.1

    def test_poisson_integer_valued_and_variance(self):
        draws = sampler(DistributionSpec.poisson(100), seed=3, count=10**6)
        assert np.all(draws == np.round(draws))
        assert abs(float(np.var(draws)) - 100.0) < 2.0

    def test_chisquare_mean(self):
        draws = sampler(DistributionSpec.chisquare(100), seed=4, count=10**6)
        assert abs(float(np.mean(draws)) - 100.0) < 3 * math.sqrt(200) / 1000

    def test_deterministic_streams(self):
        a = sampler(DistributionSpec.normal(5, 2), seed=99, count=64)
        b = sampler(DistributionSpec.normal(5, 2), seed=99, count=64)
        np.testing.assert_array_equal(a, b)

    def test_bad_parameters(self):
        with pytest.raises(BadParameters):
            DistributionSpec.uniform(2, 1)
        with pytest.raises(BadParameters):
            DistributionSpec.normal(0, 0)
        with pytest.raises(BadParameters):
            DistributionSpec.chisquare(-1)

    def test_closed_form_moments(self):
        assert DistributionSpec.uniform(50, 150).variance() == pytest.approx(100**2 / 12)
        assert DistributionSpec.chisquare(100).variance() == 200.0
        assert DistributionSpec.poisson(100).mean() == 100.0


class TestSampleSpecs:
    def test_sample1_constants_exact(self):
        spec = table_sample(1)
        assert true_theta(spec) == 2.0
        assert true_var(spec) == 15.0

    def test_sample2_n3(self):
        spec = table_sample(2, 3)
        assert true_theta(spec) == pytest.approx(2.0)
        assert true_var(spec) == pytest.approx(14.0 / 9.0)

    def test_equal_weights_equal_sigma_is_sem_squared(self):
        spec = SampleSpec((0.0,) * 8, (3.0,) * 8, (1.0,) * 8)
        assert true_var(spec) == pytest.approx(9.0 / 8.0)

    def test_sample6_n5_weights(self):
        spec = table_sample(6, 5)
        assert spec.mus == (5.0,) * 5
        assert spec.sigmas == (1.0, 2.0, 3.0, 4.0, 5.0)
        assert spec.weights == (1.0, 1 / 4, 1 / 9, 1 / 16, 1 / 25)

    def test_sample1_generated_weights(self):
        s = generate_sample(table_sample(1), seed=5, replication_index=0)
        np.testing.assert_allclose(s.normalized().weights, [0.1, 0.2, 0.3, 0.4], atol=1e-15)
        assert s.n == 4

    def test_zero_sigma_rejected(self):
        with pytest.raises(BadParameters):
            SampleSpec((1.0,), (0.0,), (1.0,))

    def test_unknown_sample_id(self):
        with pytest.raises(BadCase):
            table_sample(7, 5)

    def test_generate_sample_deterministic_per_rep(self):
        spec = table_sample(2, 6)
        a = generate_sample(spec, 17, 3)
        b = generate_sample(spec, 17, 3)
        c = generate_sample(spec, 17, 4)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)


class TestRunReplications:
    KINDS = (EstimatorKind("weighted_mean"), EstimatorKind("whl1", S))

    def test_insufficient_replications(self):
        with pytest.raises(InsufficientReplications):
            run_replications(table_sample(1), self.KINDS, reps=1)

    def test_weighted_mean_unbiased_and_efficient(self):
        rows = run_replications(table_sample(1), self.KINDS, reps=4000, seed=7)
        wm = rows[0]
        assert wm.theta == 2.0 and wm.var_theta == 15.0
        assert wm.bias < 0.2
        assert 90.0 < wm.relative_efficiency < 110.0

    def test_worker_count_does_not_change_results(self):
        spec = table_sample(4, 6)
        one = run_replications(spec, self.KINDS, reps=400, seed=11, workers=1)
        two = run_replications(spec, self.KINDS, reps=400, seed=11, workers=3)
        assert one == two

    def test_var_matches_closed_form(self):
        # unbiased variance of the weighted mean converges on true_var
        spec = table_sample(2, 5)
        rows = run_replications(spec, (EstimatorKind("weighted_mean"),), reps=20000, seed=13)
        assert rows[0].var_hat == pytest.approx(true_var(spec), rel=0.05)


class TestInjectOutliers:
    def test_zero_proportion_identity(self):
        s = generate_sample(table_sample(2, 10), 1, 0)
        out = inject_outliers(s, ContaminationSpec(0.0), 3.0, 1, 0)
        np.testing.assert_array_equal(out.values, s.values)

    def test_count_and_shift(self):
        rng = np.random.default_rng(0)
        from whlkit.samples import WeightedSample

        s = WeightedSample(rng.normal(100, 20, size=100), np.ones(100))
        out = inject_outliers(s, ContaminationSpec(0.25, 5.0), 20.0, 9, 0)
        moved = np.flatnonzero(out.values != s.values)
        assert moved.size == 25
        np.testing.assert_allclose(out.values[moved] - s.values[moved], 100.0)
        np.testing.assert_array_equal(out.weights, s.weights)

    def test_validation(self):
        with pytest.raises(BadParameters):
            ContaminationSpec(0.3)
        with pytest.raises(BadParameters):
            ContaminationSpec(0.1, 0.0)


class TestSensitivity:
    def test_case_mapping(self):
        dist, mode = sensitivity_case(1)
        assert dist.family == "uniform" and mode == "w1"
        dist, mode = sensitivity_case(6)
        assert dist.family == "normal" and mode == "w3"
        dist, mode = sensitivity_case(11)
        assert dist.family == "poisson" and mode == "w2"

    def test_bad_case(self):
        with pytest.raises(BadCase):
            sensitivity_case(13)
        with pytest.raises(BadCase):
            sensitivity_sweep(0, (0.0,), reps=10, seed=1)

    def test_grid_validation(self):
        with pytest.raises(BadParameters):
            sensitivity_sweep(1, (0.0, 0.3), reps=10, seed=1)

    def test_row_structure_and_baseline(self):
        rows = sensitivity_sweep(4, (0.0, 0.1), reps=40, seed=21)
        assert len(rows) == 2 * len(SENSITIVITY_KINDS)
        wm0 = next(
            r
            for r in rows
            if r.proportion == 0.0 and r.estimator == EstimatorKind("weighted_mean")
        )
        # at p=0 the weighted mean IS the baseline
        assert wm0.avg_bias == 0.0 and wm0.stderr == 0.0

    def test_contamination_moves_weighted_mean(self):
        rows = sensitivity_sweep(4, (0.0, 0.25), reps=60, seed=23)
        wm = {r.proportion: r for r in rows if r.estimator == EstimatorKind("weighted_mean")}
        # +5 sigma on 25 of 100 points shifts the weighted mean by roughly
        # 0.25 * 5 * 20 = 25
        assert wm[0.25].avg_bias > 15.0

    def test_worker_determinism(self):
        a = sensitivity_sweep(2, (0.0, 0.2), reps=30, seed=29, workers=1)
        b = sensitivity_sweep(2, (0.0, 0.2), reps=30, seed=29, workers=2)
        assert a == b

    def test_insufficient_reps(self):
        with pytest.raises(InsufficientReplications):
            sensitivity_sweep(1, (0.0,), reps=1, seed=1)

    def test_n_is_100(self):
        assert SENSITIVITY_N == 100


class TestReplicationStudyInvariants:
    def test_weighted_mean_efficiency_near_100_all_samples(self):
        # the analytic weighted variance is exactly the weighted mean's
        # sampling variance, so its relative efficiency converges on 100%
        specs = [table_sample(1)] + [table_sample(sid, 10) for sid in range(2, 7)]
        for spec in specs:
            rows = run_replications(spec, (EstimatorKind("weighted_mean"),), 10000, seed=3)
            assert 95.0 <= rows[0].relative_efficiency <= 105.0

    def test_closed_form_variance_consistency_high_reps(self):
        spec = table_sample(2, 5)
        rows = run_replications(spec, (EstimatorKind("weighted_mean"),), 100000, seed=5)
        assert rows[0].var_hat == pytest.approx(true_var(spec), rel=0.05)

    def test_sample3_weighted_median_bias_reference_value(self):
        rows = run_replications(
            table_sample(3, 15), (EstimatorKind("weighted_median"),), 10000, seed=20240101
        )
        assert rows[0].bias == pytest.approx(1.98, abs=0.15)

    @pytest.mark.parametrize("sid", [4, 5])
    def test_whl2_dominates_whl1_under_skewed_weights(self, sid):
        kinds = tuple(
            EstimatorKind(fam, s) for fam in ("whl1", "whl2") for s in PairScheme
        )
        for n in (8, 12, 15):
            rows = run_replications(table_sample(sid, n), kinds, 4000, seed=11)
            re = {(r.estimator.family, r.estimator.scheme): r.relative_efficiency for r in rows}
            for s in PairScheme:
                assert re[("whl2", s)] > re[("whl1", s)]


class TestSensitivityInvariants:
    def test_no_outliers_all_estimators_near_baseline(self):
        # frozen after checking the scale: at n=100 the p=0 average
        # deviations from the weighted mean sit near 0.8 or below
        rows = sensitivity_sweep(4, (0.0,), reps=300, seed=13)
        assert all(r.avg_bias < 2.0 for r in rows)

    def test_weighted_mean_bias_nondecreasing_in_proportion(self):
        grid = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25)
        rows = sensitivity_sweep(1, grid, reps=300, seed=17)
        wm = [r for r in rows if r.estimator == EstimatorKind("weighted_mean")]
        wm.sort(key=lambda r: r.proportion)
        inversions = sum(
            1
            for a, b in zip(wm, wm[1:])
            if b.avg_bias < a.avg_bias - max(a.stderr, b.stderr)
        )
        assert inversions == 0
