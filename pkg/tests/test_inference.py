"""Plug-in variance, standardized statistic, CI coverage, AD test, slopes."""

import numpy as np
import pytest
from scipy.special import ndtr

from sbdrift.errors import EstimatorFlooredError
from sbdrift.estimator import FloorSpec, estimate_drift
from sbdrift.inference import (
    AD_CRITICAL_5PCT,
    Z_CRITICAL_95,
    anderson_darling,
    confidence_interval,
    ols_slope,
    plugin_variance,
    qq_data,
    standardized_stat,
    theory_secant_slope,
)
from sbdrift.models import SampleSet, sample_dataset
from sbdrift.truth import Query


class TestPluginVariance:
    def test_matches_direct_formula(self, interval, gg1_law):
        from sbdrift.kernels import epanechnikov_spec, eval_scaled
        from sbdrift.truth import sb_weight

        rng = np.random.default_rng(91)
        sample = sample_dataset(gg1_law, 1500, rng)
        query = Query(t=0.6, x=np.array([0.2]), xi=np.array([0.0]))
        h = 0.5
        got = plugin_variance(sample, interval, query, h)

        spec = epanechnikov_spec(1)
        delta_t = interval.delta_t(0.6)
        w = np.array(
            [float(eval_scaled(spec, xs - query.xi, h)) for xs in sample.xs]
        )
        fmat = sb_weight(interval, 0.6, query.xi, query.x, sample.xu)
        fhat = w.mean()
        ghat1 = np.mean(fmat * w)
        ghat2 = np.mean(sample.xu[:, 0] * fmat * w)
        dhat = ghat1 / fhat
        ahat = (ghat2 / fhat / dhat - query.x[0]) / delta_t
        psi = (sample.xu[:, 0] - query.x[0] - delta_t * ahat) * fmat
        e1 = np.mean(psi * w) / fhat
        e2 = np.mean(psi**2 * w) / fhat
        want = spec.l2_norm_sq / (fhat * delta_t**2 * dhat**2) * (e2 - e1**2)
        assert got == pytest.approx(want, rel=1e-12)
        assert got > 0.0

    def test_scale_invariance_of_z(self, interval, gg1_law):
        # co-rescaling psi by a constant multiplies Sigma by its square;
        # here: doubling Delta(t) contributions cancel inside Z only via
        # the exact formula, so instead check Sigma > 0 across queries and
        # that Z is invariant under replacing (ahat, a*) by shifted pairs.
        rng = np.random.default_rng(92)
        sample = sample_dataset(gg1_law, 1200, rng)
        for x0 in (-0.8, 0.0, 0.7):
            q = Query(t=0.6, x=np.array([x0]), xi=np.array([0.0]))
            sig = plugin_variance(sample, interval, q, 0.45)
            assert np.isfinite(sig) and sig > 0.0
        z1 = standardized_stat(1.3, 1.1, 0.7, 900, 0.4, 1)
        z2 = standardized_stat(1.3 + 5.0, 1.1 + 5.0, 0.7, 900, 0.4, 1)
        assert z1 == pytest.approx(z2, rel=1e-15)

    def test_rejects_d2(self, interval):
        rng = np.random.default_rng(93)
        sample = SampleSet(
            xs=rng.normal(size=(50, 2)), xu=rng.normal(size=(50, 2))
        )
        q = Query(t=0.6, x=np.array([0.0, 0.0]), xi=np.array([0.0, 0.0]))
        with pytest.raises(ValueError):
            plugin_variance(sample, interval, q, 0.8)

    def test_raises_when_floored(self, interval, gg1_law):
        rng = np.random.default_rng(94)
        sample = sample_dataset(gg1_law, 300, rng)
        q = Query(t=0.6, x=np.array([0.2]), xi=np.array([0.0]))
        floors = FloorSpec(f_min=1e6, d_min=0.0)
        assert estimate_drift(sample, interval, q, 0.5, 0.5, floors).floor_triggered
        with pytest.raises(EstimatorFlooredError):
            plugin_variance(sample, interval, q, 0.5, floors)


class TestStandardizedStat:
    def test_formula(self):
        z = standardized_stat(2.0, 1.5, 4.0, 400, 0.5, 1)
        assert z == pytest.approx(np.sqrt(200.0) * 0.5 / 2.0)

    def test_d2_exponent(self):
        z = standardized_stat(1.0, 0.0, 1.0, 100, 0.5, 2)
        assert z == pytest.approx(np.sqrt(100 * 0.25))

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            standardized_stat(1.0, 0.0, 0.0, 100, 0.5, 1)
        with pytest.raises(ValueError):
            standardized_stat(1.0, 0.0, -1.0, 100, 0.5, 1)


class TestConfidenceInterval:
    def test_coverage_iff_z_small(self):
        M, h, sig = 900, 0.4, 0.64
        scale = np.sqrt(sig / (M * h))
        for mult in (0.0, 1.0, 1.9599, 1.96, 1.9601, 5.0, -1.96, -2.1):
            a_star = 0.7
            a_hat = a_star + mult * scale
            ci = confidence_interval(a_hat, sig, M, h, 1, a_star)
            z = standardized_stat(a_hat, a_star, sig, M, h, 1)
            assert ci.covered == (abs(z) <= Z_CRITICAL_95)
            assert ci.lo == pytest.approx(a_hat - 1.96 * scale)
            assert ci.hi == pytest.approx(a_hat + 1.96 * scale)

    def test_zero_sigma_degenerates(self):
        ci = confidence_interval(1.0, 0.0, 100, 0.5, 1, 1.0)
        assert ci.lo == ci.hi == 1.0
        assert ci.covered
        miss = confidence_interval(1.0, 0.0, 100, 0.5, 1, 1.0 + 1e-9)
        assert not miss.covered

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            confidence_interval(1.0, -0.1, 100, 0.5, 1, 1.0)

    def test_other_level(self):
        ci = confidence_interval(0.0, 1.0, 100, 1.0, 1, 0.0, level=0.9)
        # z_{0.95} = 1.6448...
        assert ci.hi == pytest.approx(1.6448536269514722 / 10.0, rel=1e-12)


class TestAndersonDarling:
    def test_single_zero_hand_value(self):
        # n=1, z=0: A^2 = -1 - (ln 0.5 + ln 0.5) = 2 ln 2 - 1
        res = anderson_darling([0.0])
        assert res.statistic == pytest.approx(2.0 * np.log(2.0) - 1.0, rel=1e-12)
        assert res.statistic == pytest.approx(0.3862943611, abs=1e-9)
        assert not res.reject_5pct
        assert not res.clamped

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(101)
        z = rng.normal(size=37)
        res = anderson_darling(z)
        zs = np.sort(z)
        n = zs.size
        s = 0.0
        for i in range(1, n + 1):
            s += (2 * i - 1) * (
                np.log(ndtr(zs[i - 1])) + np.log(1.0 - ndtr(zs[n - i]))
            )
        want = -n - s / n
        assert res.statistic == pytest.approx(want, rel=1e-12)

    def test_order_invariance(self):
        rng = np.random.default_rng(102)
        z = rng.normal(size=50)
        a = anderson_darling(z).statistic
        b = anderson_darling(z[::-1]).statistic
        c = anderson_darling(rng.permutation(z)).statistic
        assert a == b == c

    def test_rejects_shifted_sample(self):
        rng = np.random.default_rng(103)
        z = rng.normal(size=400) + 1.0
        res = anderson_darling(z)
        assert res.statistic > AD_CRITICAL_5PCT
        assert res.reject_5pct

    def test_clamping_flagged_for_extreme_values(self):
        res = anderson_darling([-50.0, 0.0, 50.0])
        assert res.clamped
        assert np.isfinite(res.statistic)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            anderson_darling([])

    def test_null_rejection_rate_near_half(self):
        # The fully specified critical value 0.75 sits below the case-0
        # null median (about 0.77), so perfect N(0,1) draws of size 150
        # are rejected roughly half the time.  This guards the pinned
        # convention against silently switching to an estimated-parameter
        # variant, whose rejection rate would be near 0.05 here.
        rng = np.random.default_rng(104)
        rejects = sum(
            anderson_darling(rng.normal(size=150)).reject_5pct
            for _ in range(200)
        )
        assert 0.30 <= rejects / 200.0 <= 0.70


class TestQQ:
    def test_shape_and_monotonicity(self):
        rng = np.random.default_rng(105)
        z = rng.normal(size=61)
        pairs = qq_data(z)
        assert pairs.shape == (61, 2)
        assert np.all(np.diff(pairs[:, 0]) > 0)
        np.testing.assert_array_equal(pairs[:, 1], np.sort(z))

    def test_median_position(self):
        pairs = qq_data([3.0, -1.0, 0.5])
        # middle theoretical quantile is Phi^-1(0.5) = 0
        assert pairs[1, 0] == pytest.approx(0.0, abs=1e-15)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            qq_data([1.0])


class TestSlopes:
    def test_ols_hand_case(self):
        assert ols_slope([0.0, 1.0, 2.0], [1.0, 3.0, 5.0]) == pytest.approx(2.0)

    def test_ols_errors(self):
        with pytest.raises(ValueError):
            ols_slope([1.0], [2.0])
        with pytest.raises(ValueError):
            ols_slope([1.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            ols_slope([1.0, 2.0], [0.0, 1.0, 2.0])

    def test_theory_secant_reference_values(self):
        assert theory_secant_slope(1000, 8000, 1) == pytest.approx(
            -0.349379, abs=1e-6
        )
        assert theory_secant_slope(1000, 8000, 2) == pytest.approx(
            -0.291150, abs=1e-6
        )

    def test_theory_secant_symmetry(self):
        a = theory_secant_slope(1000, 8000, 1)
        b = theory_secant_slope(8000, 1000, 1)
        assert a == pytest.approx(b, rel=1e-12)

    def test_theory_secant_limits(self):
        # secant slope approaches -p as the log-log correction vanishes
        p = 2.0 / 5.0
        near = theory_secant_slope(10**3, 10**6, 1)
        wide = theory_secant_slope(10**6, 10**9, 1)
        far = theory_secant_slope(10**12, 10**15, 1)
        assert abs(far + p) < abs(wide + p) < abs(near + p)
        assert abs(far + p) < 0.015
        with pytest.raises(ValueError):
            theory_secant_slope(1000, 1000, 1)
        with pytest.raises(ValueError):
            theory_secant_slope(1, 1000, 1)


class TestEndToEndZ:
    def test_z_distribution_sane_at_moderate_m(self, interval, gg1_law):
        # 40 reps at M=2000: Z should center near 0 with unit-order spread
        from sbdrift.inference import plugin_variance
        from sbdrift.truth import true_drift

        query = Query(t=0.6, x=np.array([0.2]), xi=np.array([0.0]))
        a_star = float(true_drift(gg1_law, interval, query)[0])
        h = 1.0 * 2000 ** -0.22
        zs = []
        for seed in range(40):
            rng = np.random.default_rng(5000 + seed)
            sample = sample_dataset(gg1_law, 2000, rng)
            est = estimate_drift(sample, interval, query, h, h)
            sig = plugin_variance(sample, interval, query, h)
            zs.append(
                standardized_stat(
                    float(est.value[0]), a_star, sig, 2000, h, 1
                )
            )
        zs = np.asarray(zs)
        assert abs(zs.mean()) < 0.5
        assert 0.4 < zs.std(ddof=1) < 1.8
        cover = np.mean(np.abs(zs) <= 1.96)
        assert cover > 0.8
