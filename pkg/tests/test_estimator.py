"""Plug-in estimator: ratio identities, floors, and the transfer bound."""

import numpy as np
import pytest

from sbdrift.estimator import (
    NO_FLOORS,
    FloorSpec,
    bandwidth_stack,
    estimate_drift,
    estimate_drift_grid,
    estimate_f,
    estimate_g,
    ratio_transfer_bound,
)
from sbdrift.errors import RatioTransferNotApplicableError
from sbdrift.kernels import epanechnikov_spec, eval_scaled
from sbdrift.models import SampleSet, make_law, sample_dataset
from sbdrift.truth import IntervalSpec, Query, sb_weight


def _kh(z, h):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return float(eval_scaled(epanechnikov_spec(z.size), z, h))


def _sample(m, d=1, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return SampleSet(
        xs=scale * rng.normal(size=(m, d)), xu=scale * rng.normal(size=(m, d))
    )


def _manual_drift(sample, interval, query, h1, h2):
    """Reference formula written with plain numpy, no shared code paths."""
    m = len(sample)
    delta_t = interval.delta_t(query.t)
    w1 = np.array([_kh(xs - query.xi, h1) for xs in sample.xs])
    w2 = np.array([_kh(xs - query.xi, h2) for xs in sample.xs])
    fmat = sb_weight(interval, query.t, query.xi, query.x, sample.xu)
    fhat1, fhat2 = w1.sum() / m, w2.sum() / m
    ghat1 = float(np.sum(fmat * w1)) / m
    ghat2 = (sample.xu * (fmat * w2)[:, None]).sum(axis=0) / m
    nhat, dhat = ghat2 / fhat2, ghat1 / fhat1
    return (nhat / dhat - query.x) / delta_t


class TestBlockEstimates:
    def test_f_matches_direct_sum(self, interval):
        sample = _sample(64, seed=3)
        xi = np.array([0.25])
        for h in (0.3, 0.9, 1.7):
            direct = np.mean([_kh(xs - xi, h) for xs in sample.xs])
            assert estimate_f(sample, xi, h) == pytest.approx(direct, rel=1e-14)

    def test_f_2d(self, interval):
        sample = _sample(40, d=2, seed=4)
        xi = np.array([0.1, -0.2])
        direct = np.mean([_kh(xs - xi, 1.1) for xs in sample.xs])
        assert estimate_f(sample, xi, 1.1) == pytest.approx(direct, rel=1e-14)

    def test_g_scalar_and_vector(self, interval):
        sample = _sample(50, seed=5)
        query = Query(t=0.6, x=np.array([0.2]), xi=np.array([0.0]))
        w = np.array([_kh(xs - query.xi, 0.8) for xs in sample.xs])
        fmat = sb_weight(interval, 0.6, query.xi, query.x, sample.xu)
        g1 = estimate_g(sample, interval, query, 0.8)
        g2 = estimate_g(sample, interval, query, 0.8, weighted_by_y=True)
        assert isinstance(g1, float)
        assert g1 == pytest.approx(float(np.mean(fmat * w)), rel=1e-13)
        assert g2.shape == (1,)
        ref = (sample.xu * (fmat * w)[:, None]).mean(axis=0)
        assert np.allclose(g2, ref, rtol=1e-13)

    def test_bad_inputs_rejected(self, interval):
        sample = _sample(8)
        query = Query(t=0.6, x=np.array([0.0]), xi=np.array([0.0]))
        with pytest.raises(ValueError):
            estimate_f(sample, [0.0], 0.0)
        with pytest.raises(ValueError):
            estimate_f(sample, [0.0], -1.0)
        with pytest.raises(ValueError):
            estimate_g(sample, interval, query, 0.0)
        with pytest.raises(ValueError):
            estimate_drift(sample, interval, query, 0.5, -0.5)
        with pytest.raises(ValueError):
            SampleSet(xs=np.zeros((3, 1)), xu=np.zeros((4, 1)))


class TestDriftFormula:
    def test_matches_manual_reference(self, interval):
        query = Query(t=0.6, x=np.array([0.3]), xi=np.array([0.1]))
        for seed, h1, h2 in [(0, 0.9, 0.9), (1, 1.2, 0.6), (2, 0.7, 1.4)]:
            sample = _sample(120, seed=seed)
            est = estimate_drift(sample, interval, query, h1, h2)
            assert not est.floor_triggered
            ref = _manual_drift(sample, interval, query, h1, h2)
            assert np.allclose(est.value, ref, rtol=1e-12)

    def test_matches_manual_reference_2d(self, interval):
        query = Query(t=0.6, x=np.array([0.3, -0.1]), xi=np.array([0.0, 0.2]))
        sample = _sample(150, d=2, seed=7)
        est = estimate_drift(sample, interval, query, 1.0, 1.3)
        ref = _manual_drift(sample, interval, query, 1.0, 1.3)
        assert np.allclose(est.value, ref, rtol=1e-12)

    def test_shared_bandwidth_reuses_kde_pass(self, interval):
        sample = _sample(60, seed=9)
        query = Query(t=0.6, x=np.array([0.2]), xi=np.array([0.0]))
        est = estimate_drift(sample, interval, query, 0.85, 0.85)
        assert est.fhat1 == est.fhat2
        assert est.fhat1 == estimate_f(sample, query.xi, 0.85)

    def test_m1_identity_exact_at_t_equal_s(self):
        # At t = s with x = xi both exponent terms cancel bitwise, so the
        # bridge weight is exactly 1.0 for every X_u; X_s = xi with
        # h = 0.75 makes the kde weight exactly 1.0 too, and the
        # single-pair estimate must reproduce (X_u - x) / (u - t) bitwise.
        interval = IntervalSpec()
        rng = np.random.default_rng(11)
        for _ in range(50):
            xi = rng.uniform(-2, 2)
            xu = rng.uniform(-2, 2)
            sample = SampleSet(xs=np.array([[xi]]), xu=np.array([[xu]]))
            query = Query(t=interval.s, x=np.array([xi]), xi=np.array([xi]))
            est = estimate_drift(sample, interval, query, 0.75, 0.75)
            expected = (xu - xi) / interval.delta_t(interval.s)
            assert est.value[0] == expected
            assert est.dhat == 1.0 and est.fhat1 == 1.0

    def test_m1_identity_generic_inputs(self, interval):
        # Away from t = s the F factor cancels in Nhat / Dhat up to a few
        # ulps; the estimate still equals (X_u - x) / (u - t) to 1e-13.
        rng = np.random.default_rng(12)
        for _ in range(50):
            xi = rng.uniform(-1.5, 1.5)
            xs = xi + rng.uniform(-0.5, 0.5)
            xu = rng.uniform(-2, 2)
            x = rng.uniform(-2, 2)
            h = abs(xs - xi) / rng.uniform(0.2, 0.95)
            sample = SampleSet(xs=np.array([[xs]]), xu=np.array([[xu]]))
            query = Query(t=0.6, x=np.array([x]), xi=np.array([xi]))
            est = estimate_drift(sample, interval, query, h, h)
            expected = (xu - x) / interval.delta_t(0.6)
            assert est.value[0] == pytest.approx(expected, rel=1e-13, abs=1e-13)

    def test_m1_identity_2d(self):
        interval = IntervalSpec()
        xi = np.array([0.5, -0.25])
        xu = np.array([1.25, 0.75])
        sample = SampleSet(xs=xi[None, :], xu=xu[None, :])
        query = Query(t=interval.s, x=xi, xi=xi)
        # k(0)^2 / h^2 = 1 at h = 0.75: both axes contribute 0.75 / 0.75.
        est = estimate_drift(sample, interval, query, 0.75, 0.75)
        np.testing.assert_array_equal(est.value, (xu - xi) / interval.delta)


class TestFloors:
    def test_f_floor_triggers_at_half(self, interval):
        sample = _sample(200, seed=21)
        query = Query(t=0.6, x=np.array([0.1]), xi=np.array([0.0]))
        fhat = estimate_f(sample, query.xi, 0.9)
        hot = estimate_drift(
            sample, interval, query, 0.9, 0.9, FloorSpec(f_min=2.0 * fhat * 1.01, d_min=0.0)
        )
        cold = estimate_drift(
            sample, interval, query, 0.9, 0.9, FloorSpec(f_min=2.0 * fhat * 0.99, d_min=0.0)
        )
        assert hot.floor_triggered and not cold.floor_triggered
        np.testing.assert_array_equal(hot.value, np.zeros(1))

    def test_d_floor_triggers_at_half(self, interval):
        sample = _sample(200, seed=22)
        query = Query(t=0.6, x=np.array([0.1]), xi=np.array([0.0]))
        base = estimate_drift(sample, interval, query, 0.9, 0.9)
        hot = estimate_drift(
            sample, interval, query, 0.9, 0.9, FloorSpec(0.0, 2.0 * base.dhat * 1.01)
        )
        cold = estimate_drift(
            sample, interval, query, 0.9, 0.9, FloorSpec(0.0, 2.0 * base.dhat * 0.99)
        )
        assert hot.floor_triggered and not cold.floor_triggered

    def test_empty_kde_mass_floors_even_without_floors(self, interval):
        # xi far from every X_s: fhat = 0, so the ratio is undefined and
        # the estimate must be zeroed under NO_FLOORS as well.
        sample = _sample(30, seed=23)
        query = Query(t=0.6, x=np.array([0.0]), xi=np.array([25.0]))
        est = estimate_drift(sample, interval, query, 0.5, 0.5, NO_FLOORS)
        assert est.floor_triggered
        np.testing.assert_array_equal(est.value, np.zeros(1))
        assert est.fhat1 == 0.0 and est.dhat == 0.0

    def test_second_bandwidth_floor(self, interval):
        # h2 so small that no pair lands in the kernel support at xi while
        # fhat1 stays healthy: the fhat2 branch has to floor the estimate.
        rng = np.random.default_rng(24)
        xs = rng.uniform(0.5, 1.5, size=(100, 1))
        sample = SampleSet(xs=xs, xu=rng.normal(size=(100, 1)))
        query = Query(t=0.6, x=np.array([0.5]), xi=np.array([0.0]))
        est = estimate_drift(sample, interval, query, 1.0, 1e-4)
        assert est.fhat1 > 0.0 and est.fhat2 == 0.0
        assert est.floor_triggered

    def test_floorspec_rejects_negative(self):
        with pytest.raises(ValueError):
            FloorSpec(-0.1, 0.0)
        with pytest.raises(ValueError):
            FloorSpec(0.0, -1.0)


class TestGridAndStack:
    def test_grid_bit_identical_to_pointwise(self, interval, xgrid_1d):
        sample = _sample(500, seed=31)
        xi = np.array([0.0])
        floors = FloorSpec(0.05, 0.05)
        grid = estimate_drift_grid(sample, interval, 0.6, xi, xgrid_1d, 0.85, floors)
        for i in (0, 37, 101, 199):
            point = estimate_drift(
                sample,
                interval,
                Query(t=0.6, x=xgrid_1d[i], xi=xi),
                0.85,
                0.85,
                floors,
            )
            assert grid.values[i][0] == point.value[0]
            assert grid.dhat[i] == point.dhat
            assert bool(grid.floor_triggered[i]) == point.floor_triggered
        assert grid.fhat == estimate_f(sample, xi, 0.85)

    def test_grid_getitem_roundtrip(self, interval, xgrid_1d):
        sample = _sample(200, seed=32)
        grid = estimate_drift_grid(
            sample, interval, 0.6, [0.0], xgrid_1d, 0.9, NO_FLOORS
        )
        assert len(grid) == xgrid_1d.shape[0]
        fifth = grid[5]
        assert fifth.value[0] == grid.values[5][0]
        assert sum(1 for _ in grid) == len(grid)

    def test_stack_layers_match_single_grid_calls(self, interval, xgrid_1d):
        sample = _sample(400, seed=33)
        hs = [1.2, 0.85, 0.6]
        floors = FloorSpec(0.02, 0.02)
        stack = bandwidth_stack(
            sample, interval, 0.6, [0.0], xgrid_1d, hs, floors
        )
        assert stack.values.shape == (3, 200, 1)
        for i, h in enumerate(hs):
            single = estimate_drift_grid(
                sample, interval, 0.6, [0.0], xgrid_1d, h, floors
            )
            np.testing.assert_array_equal(stack.values[i], single.values)
            np.testing.assert_array_equal(stack.dhat[i], single.dhat)
            assert stack.fhat[i] == single.fhat

    def test_stack_input_validation(self, interval, xgrid_1d):
        sample = _sample(20, seed=34)
        with pytest.raises(ValueError):
            bandwidth_stack(sample, interval, 0.6, [0.0], xgrid_1d[:, 0], [0.5])
        with pytest.raises(ValueError):
            bandwidth_stack(sample, interval, 0.6, [0.0], xgrid_1d, [0.5, 0.0])
        wide = np.hstack([xgrid_1d, xgrid_1d])
        with pytest.raises(ValueError):
            bandwidth_stack(sample, interval, 0.6, [0.0], wide, [0.5])


def _blocks_from_instance(law, interval, query, sample, h, truth):
    from sbdrift.truth import population_moments

    f = float(law.marginal_density(query.xi))
    mom = population_moments(law, interval, query)
    dstar, nstar = mom["dstar"], np.atleast_1d(mom["nstar"])
    fhat = estimate_f(sample, query.xi, h)
    ghat1 = estimate_g(sample, interval, query, h)
    ghat2 = estimate_g(sample, interval, query, h, weighted_by_y=True)
    return f, f * dstar, f * nstar, nstar / dstar, fhat, ghat1, ghat2


class TestRatioTransfer:
    def test_bound_dominates_error_synthetic_blocks(self, interval):
        # Pure algebra check on randomly perturbed block values: whenever
        # the empirical floors hold, the deterministic bound must dominate
        # |ahat - a*| = |Nhat/Dhat - N*/D*| / (u - t).
        rng = np.random.default_rng(41)
        delta_t = 0.4
        checked = 0
        for _ in range(500):
            f_min = rng.uniform(0.05, 0.3)
            d_min = rng.uniform(0.05, 0.3)
            f = f_min * rng.uniform(1.0, 3.0)
            dstar = d_min * rng.uniform(1.0, 3.0)
            qstar = rng.uniform(-2.0, 2.0)
            g1, g2 = f * dstar, f * dstar * qstar
            fhat1 = f * rng.uniform(0.6, 1.4)
            fhat2 = f * rng.uniform(0.6, 1.4)
            ghat1 = g1 * rng.uniform(0.6, 1.4)
            ghat2 = g2 + abs(g2) * rng.uniform(-0.4, 0.4) + rng.normal(0, 0.01)
            dhat = ghat1 / fhat1
            if fhat1 < 0.5 * f_min or fhat2 < 0.5 * f_min or dhat < 0.5 * d_min:
                continue
            bound = ratio_transfer_bound(
                fhat1, fhat2, ghat1, ghat2, f, g1, g2, qstar, f_min, d_min, delta_t
            )
            actual = abs((ghat2 / fhat2) / dhat - qstar) / delta_t
            assert bound >= actual * (1.0 - 1e-12)
            checked += 1
        assert checked > 300

    def test_bound_dominates_error_on_gg1_samples(self, interval, gg1_law):
        from sbdrift.truth import true_drift

        query = Query(t=0.6, x=np.array([0.2]), xi=np.array([0.0]))
        astar = true_drift(gg1_law, interval, query)
        f_min, d_min = 0.5 * 0.4000223, 0.5 * 0.0061400
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            sample = sample_dataset(gg1_law, 800, rng)
            f, g1, g2, qstar, fhat, ghat1, ghat2 = _blocks_from_instance(
                gg1_law, interval, query, sample, 0.8, astar
            )
            try:
                bound = ratio_transfer_bound(
                    fhat, fhat, ghat1, ghat2, f, g1, g2, qstar, f_min, d_min, 0.4
                )
            except RatioTransferNotApplicableError:
                continue
            est = estimate_drift(sample, interval, query, 0.8, 0.8)
            err = float(np.linalg.norm(est.value - astar))
            assert bound >= err
            hits += 1
        assert hits >= 18

    def test_not_applicable_raised_when_floors_fail(self):
        with pytest.raises(RatioTransferNotApplicableError):
            ratio_transfer_bound(
                0.01, 0.4, 0.1, 0.1, 0.4, 0.1, 0.1, 1.0, 0.1, 0.1, 0.4
            )
        with pytest.raises(RatioTransferNotApplicableError):
            ratio_transfer_bound(
                0.4, 0.01, 0.1, 0.1, 0.4, 0.1, 0.1, 1.0, 0.1, 0.1, 0.4
            )
        with pytest.raises(RatioTransferNotApplicableError):
            ratio_transfer_bound(
                0.4, 0.4, 0.001, 0.1, 0.4, 0.1, 0.1, 1.0, 0.1, 0.2, 0.4
            )


class TestConsistency:
    def test_error_shrinks_with_sample_size(self, interval, gg1_law):
        from sbdrift.truth import true_drift

        query = Query(t=0.6, x=np.array([0.5]), xi=np.array([0.0]))
        astar = true_drift(gg1_law, interval, query)
        errs = {}
        for m, h in [(500, 0.9), (32000, 0.35)]:
            vals = []
            for seed in range(4):
                rng = np.random.default_rng(7000 + seed)
                sample = sample_dataset(gg1_law, m, rng)
                est = estimate_drift(sample, interval, query, h, h)
                vals.append(float(np.linalg.norm(est.value - astar)))
            errs[m] = np.mean(vals)
        assert errs[32000] < 0.5 * errs[500]
