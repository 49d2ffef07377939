import numpy as np
import pytest

import tiltdiff as td
from tiltdiff.errors import MissingBoundError
from tiltdiff.scoregap import (
    BatteryRow,
    ErrorFieldSpec,
    field_loss_estimate,
    field_gap_estimate,
)

SCHED = td.NoiseSchedule(eta=1.0, sigma=1.0, horizon=1.0, steps=10)


class TestErrorFieldSpec:
    def test_linear_evaluation_and_lipschitz(self):
        f = ErrorFieldSpec(kind="linear", slope=0.5)
        x = np.array([[2.0, -4.0]])
        assert np.array_equal(f(x, 0.3), [[1.0, -2.0]])
        assert f.lipschitz(0.3) == 0.5

    def test_affine_offset(self):
        f = ErrorFieldSpec(kind="affine", slope=1.0, offset=0.25)
        assert f(np.array([[1.0]]), 0.0)[0] == pytest.approx([1.25])

    def test_clipped_limits(self):
        f = ErrorFieldSpec(kind="clipped", slope=2.0, clip_at=1.0)
        out = f(np.array([[3.0, -3.0, 0.1]]), 0.0)
        assert out[0] == pytest.approx([1.0, -1.0, 0.2])

    def test_time_varying_slope(self):
        f = ErrorFieldSpec(kind="linear", slope=lambda t: np.exp(-t))
        assert f.lipschitz(1.0) == pytest.approx(np.exp(-1.0))

    def test_lying_lipschitz_constant_caught(self):
        class Lying(ErrorFieldSpec):
            def lipschitz(self, t):
                return 0.1 * abs(self.slope_at(t))

        with pytest.raises(ValueError, match="Lipschitz"):
            Lying(kind="linear", slope=1.0)


class TestDiscountedLipschitzIntegral:
    def test_zero_field(self):
        f = ErrorFieldSpec(kind="linear", slope=0.0)
        assert td.discounted_lipschitz_integral(f, SCHED) == 0.0

    def test_constant_closed_form(self):
        f = ErrorFieldSpec(kind="linear", slope=1.0)
        got = td.discounted_lipschitz_integral(f, SCHED)
        assert got == pytest.approx((1 - np.exp(-2)) / 2, rel=1e-12)

    def test_quadratic_scaling(self):
        a = td.discounted_lipschitz_integral(ErrorFieldSpec(kind="linear", slope=1.0), SCHED)
        b = td.discounted_lipschitz_integral(ErrorFieldSpec(kind="linear", slope=0.5), SCHED)
        assert b == pytest.approx(a / 4, rel=1e-12)

    def test_callable_slope_matches_quadrature(self):
        f = ErrorFieldSpec(kind="linear", slope=lambda t: np.exp(-0.7 * t))
        got = td.discounted_lipschitz_integral(f, SCHED)
        # int_0^1 exp(-1.4 t) exp(-2 t) dt = (1 - exp(-3.4)) / 3.4
        assert got == pytest.approx((1 - np.exp(-3.4)) / 3.4, rel=1e-9)


class TestFieldGap:
    def test_same_samples_zero(self):
        f = ErrorFieldSpec(kind="linear", slope=1.0)
        mu = td.Dataset(np.random.default_rng(0).normal(size=(8, 1)))
        est = field_gap_estimate(f, mu, mu, SCHED, 64, np.random.default_rng(1))
        assert est.value <= est.noise_allowance + 3 * est.stderr

    def test_point_mass_analytic_value(self):
        # mu = delta_1, nu = delta_0, f = identity: the gap is exp(-2t) in t,
        # averaging to (1 - exp(-2)) / 2
        f = ErrorFieldSpec(kind="linear", slope=1.0)
        mu = td.Dataset(np.ones((64, 1)))
        nu = td.Dataset(np.zeros((64, 1)))
        est = field_gap_estimate(f, mu, nu, SCHED, 3000, np.random.default_rng(5))
        want = (1 - np.exp(-2)) / 2
        assert abs(est.value - want) <= 3 * est.stderr + est.noise_allowance

    def test_quadratic_in_field_scale(self):
        mu = td.Dataset(np.ones((16, 1)))
        nu = td.Dataset(np.zeros((16, 1)))
        a = td.field_gap(ErrorFieldSpec(kind="linear", slope=1.0), mu, nu, SCHED,
                         800, np.random.default_rng(3))
        b = td.field_gap(ErrorFieldSpec(kind="linear", slope=2.0), mu, nu, SCHED,
                         800, np.random.default_rng(3))
        assert b == pytest.approx(4 * a, rel=0.05)

    def test_invariant_to_sample_order(self):
        f = ErrorFieldSpec(kind="linear", slope=1.0)
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(10, 2))
        mu = td.Dataset(pts)
        mu_perm = td.Dataset(pts[::-1])
        nu = td.Dataset(rng.normal(size=(10, 2)))
        ea = field_gap_estimate(f, mu, nu, SCHED, 400, np.random.default_rng(9))
        eb = field_gap_estimate(f, mu_perm, nu, SCHED, 400, np.random.default_rng(9))
        assert abs(ea.value - eb.value) <= 3 * (ea.stderr + eb.stderr) + 2 * ea.noise_allowance


class TestFieldGapBound:
    def test_zero_distance_zero_bound(self):
        for variant in ("w2", "w2_bounded", "w1_bounded"):
            assert td.field_gap_bound(variant, 0.0, 0.5, 0.3, support_radius=1.0) == 0.0

    def test_analytic_instance_rhs(self):
        # delta_1 vs delta_0 with the identity field: W2 = 1,
        # C = (1 - e^-2)/2, eps^2 = 1 - C
        c = (1 - np.exp(-2)) / 2
        eps = np.sqrt(1 - c)
        rhs = td.field_gap_bound("w2", 1.0, c, eps)
        assert rhs == pytest.approx(c + 2 * np.sqrt(c) * eps, rel=1e-12)
        assert rhs == pytest.approx(1.4232, abs=2e-4)
        assert c <= rhs  # the gap itself is c

    def test_bounded_variant_dominates_quadratic_term(self):
        # x^2 <= 2 M x on [0, 2M] makes the bounded form dominate the w2 term
        c, eps, m = 0.4, 0.3, 1.0
        for w2 in (0.1, 0.5, 1.0, 2.0):
            quad = td.field_gap_bound("w2", w2, c, eps)
            bounded = td.field_gap_bound("w2_bounded", w2, c, eps, support_radius=m)
            assert bounded + 1e-12 >= quad or w2 > 2 * m

    def test_w1_variant_value(self):
        c, eps, m, w1 = 0.25, 0.2, 1.5, 0.8
        k = 2 * m * c
        want = k * w1 + 2 * np.sqrt(k * eps) * np.sqrt(w1)
        assert td.field_gap_bound("w1_bounded", w1, c, eps, support_radius=m) == pytest.approx(want)

    def test_bounded_needs_radius(self):
        with pytest.raises(MissingBoundError):
            td.field_gap_bound("w2_bounded", 1.0, 0.5, 0.1)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            td.field_gap_bound("w3", 1.0, 0.5, 0.1)


class TestEpsilonConsistency:
    def test_eps_sq_equals_field_loss_value(self):
        # the eps fed into the bounds must be the same harness's loss estimate
        f = ErrorFieldSpec(kind="linear", slope=1.0)
        nu = td.Dataset(np.zeros((32, 1)))
        est1 = field_loss_estimate(f, nu, SCHED, 500, np.random.default_rng(4))
        est2 = field_loss_estimate(f, nu, SCHED, 500, np.random.default_rng(4))
        assert est1.value == est2.value
        # analytic: E ||y_t||^2 = noise_var(t); time average = 1 - (1-e^-2)/2
        want = 1 - (1 - np.exp(-2)) / 2
        assert abs(est1.value - want) <= 3 * est1.stderr + 0.01


class TestInequalityBattery:
    def test_battery_all_hold(self):
        rows = td.inequality_battery(50, SCHED, np.random.default_rng(123), n_mc=400)
        assert len(rows) == 150
        assert all(isinstance(r, BatteryRow) for r in rows)
        violations = [r for r in rows if not r.holds]
        assert violations == []

    def test_analytic_instance_present_and_tight(self):
        rows = td.inequality_battery(5, SCHED, np.random.default_rng(9), n_mc=2000)
        first = [r for r in rows if r.instance == 0 and r.variant == "w2"][0]
        want = (1 - np.exp(-2)) / 2
        assert abs(first.gap - want) <= first.margin
        assert first.wasserstein == pytest.approx(1.0)

    def test_zero_field_rows_zero_gap(self):
        f = ErrorFieldSpec(kind="linear", slope=0.0)
        mu = td.Dataset(np.random.default_rng(0).normal(size=(8, 2)))
        nu = td.Dataset(np.random.default_rng(1).normal(size=(8, 2)))
        assert td.field_gap(f, mu, nu, SCHED, 100, np.random.default_rng(2)) == 0.0

    def test_deterministic_given_seed(self):
        a = td.inequality_battery(6, SCHED, np.random.default_rng(77), n_mc=100)
        b = td.inequality_battery(6, SCHED, np.random.default_rng(77), n_mc=100)
        assert [(r.gap, r.bound) for r in a] == [(r.gap, r.bound) for r in b]
