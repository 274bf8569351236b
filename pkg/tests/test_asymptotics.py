import math

import numpy as np
import pytest

from solitonlab import asymptotics, bryant
from solitonlab.asymptotics import (
    RDSquaredBoundedError,
    WindowTooShortError,
    angle_check,
    angle_profile,
    asymptotic_constants,
    audit_pick,
    bishop_gromov_scan,
    curve_limits,
    level_surface_diameter,
    pick_points,
    sandwich_check,
)


@pytest.fixture(scope="module")
def reports(profile):
    return asymptotic_constants(profile, window=(50.0, 200.0))


@pytest.fixture(scope="module")
def seq(cigar_line):
    return pick_points(cigar_line, j_max=6, n_sigma=48, n_theta=24)


class TestGrowthFits:
    def test_all_six_products_reported(self, reports):
        assert set(reports) == {
            "R_times_s", "D_over_sqrt_s", "D_over_lambda",
            "R_times_D_squared", "A_over_lambda", "V_over_lambda_squared"}

    def test_curvature_distance_product_near_one(self, reports):
        rep = reports["R_times_s"]
        assert 0.9 <= rep.constant <= 1.1
        assert abs(rep.exponent) <= 0.05
        assert rep.diagnostic <= 0.02

    def test_diameter_square_root_growth(self, reports):
        rep = reports["D_over_sqrt_s"]
        assert rep.constant == pytest.approx(4.69, abs=0.05)
        assert abs(rep.exponent) <= 0.01
        assert rep.diagnostic <= 0.01

    def test_curvature_diameter_squared_level(self, reports):
        rep = reports["R_times_D_squared"]
        assert rep.constant == pytest.approx(20.3, abs=0.3)
        assert math.pi**2 <= rep.constant <= 3 * math.pi**2
        assert rep.diagnostic <= 0.01

    def test_diameter_over_level_decreasing_but_not_small(self, profile,
                                                          reports):
        rep = reports["D_over_lambda"]
        assert rep.exponent < 0.0
        # terminal value at level 200 is still well above 1/4
        r = profile.invert_potential(200.0)
        terminal = math.pi * float(profile.w_at(r)) / 200.0
        assert terminal == pytest.approx(0.3194, abs=0.002)

    def test_area_and_volume_growth_linear_quadratic(self, reports):
        assert reports["A_over_lambda"].exponent == pytest.approx(0.0, abs=0.1)
        assert reports["V_over_lambda_squared"].exponent == pytest.approx(
            0.0, abs=0.1)

    def test_window_beyond_profile_refused(self, short_profile):
        with pytest.raises(WindowTooShortError):
            asymptotic_constants(short_profile, window=(50.0, 200.0))

    def test_narrow_window_refused(self, profile):
        with pytest.raises(WindowTooShortError):
            asymptotic_constants(profile, window=(100.0, 150.0))


class TestCurveLimits:
    def test_radial_curve_flat_limit(self, profile):
        rec = curve_limits(profile)
        assert rec.zeta == pytest.approx(1.0, abs=0.02)
        assert rec.R_limit == pytest.approx(0.0, abs=0.02)
        assert rec.closure_residual() <= 0.05

    def test_product_axis_curve_closed_form(self, cigar_line):
        rec = curve_limits(cigar_line, "sigma0=0")
        assert rec.zeta == pytest.approx(math.sqrt(0.5), abs=1e-12)
        assert rec.R_limit == pytest.approx(0.5, abs=1e-12)
        assert rec.spread == 0.0
        assert rec.closure_residual() <= 1e-12

    def test_product_offset_curve_flattens(self, cigar_line):
        rec = curve_limits(cigar_line, "sigma0=2.0")
        # the curve escapes the core, so the gradient norm tends to 1
        assert rec.zeta == pytest.approx(1.0, abs=0.02)
        assert rec.R_limit <= 0.05
        assert rec.closure_residual() <= 0.05

    def test_bad_curve_id_rejected(self, cigar_line):
        with pytest.raises(ValueError):
            curve_limits(cigar_line, "axis")


class TestSandwich:
    def test_strict_upper_bound_and_threshold(self, profile):
        res = sandwich_check(profile, np.arange(5.0, 205.0, 5.0))
        assert np.all(res["ratios"] < 1.0)
        assert res["s_bar"] == pytest.approx(70.0, abs=10.0)
        assert res["worst_tail_ratio"] >= 0.95

    def test_ratio_monotone_increasing(self, profile):
        res = sandwich_check(profile, np.arange(5.0, 205.0, 5.0))
        assert np.all(np.diff(res["ratios"]) > 0)


class TestAngles:
    def test_radial_arrival_is_normal(self, profile):
        res = angle_check(profile, (0.0, 0.3), (120.0, 0.3))
        assert res["cos_theta"] == pytest.approx(1.0, abs=1e-9)
        assert res["grad_norm"] * res["cos_theta"] >= res["bound"]

    def test_product_axis_arrival_partly_tangent(self, cigar_line):
        # along the s-axis the geodesic is the axis itself; the gradient is
        # not parallel to it only through the fiber component (zero here)
        res = angle_check(cigar_line, (0.0, 0.0, 0.0), (30.0, 0.0, 0.0))
        assert res["cos_theta"] == pytest.approx(1.0, abs=1e-9)

    def test_inequality_enforced_generic_targets(self, cigar_line):
        for target in ((20.0, 1.0, 0.0), (40.0, 3.0, 0.0)):
            res = angle_check(cigar_line, (0.0, 0.0, 0.0), target)
            assert res["grad_norm"] * res["cos_theta"] >= res["bound"] - 1e-9

    def test_obstruction_profile_minimum(self, cigar_line):
        prof = angle_profile(cigar_line, base_s=0.0, lam=40.0, n=40)
        assert prof["min_cos_theta"] == pytest.approx(math.sqrt(0.5), abs=0.01)
        assert prof["min_cos_theta"] <= math.sqrt(0.5) + 0.05
        assert prof["cos_theta"][0] == pytest.approx(1.0, abs=1e-9)


class TestBishopGromov:
    def test_ratios_non_increasing(self, profile):
        res = bishop_gromov_scan(profile, np.linspace(1.0, 200.0, 50))
        assert res["worst_increase"] <= 0.0
        assert res["ratios"][0] <= 1.0 + 1e-6

    def test_alpha_estimate_small_positive(self, profile):
        res = bishop_gromov_scan(profile, np.linspace(1.0, 200.0, 50))
        assert res["alpha_estimate"] == pytest.approx(0.0154, abs=0.001)

    def test_radii_must_increase(self, profile):
        with pytest.raises(ValueError):
            bishop_gromov_scan(profile, [2.0, 1.0])


class TestLevelSurfaceDiameter:
    def test_value_and_richardson_agreement(self, cigar_line):
        d = level_surface_diameter(cigar_line, 20.0)
        d_rich = level_surface_diameter(cigar_line, 20.0, richardson=True)
        assert d == pytest.approx(42.62, abs=0.2)
        assert abs(d_rich - d) / d <= 0.01

    def test_monotone_in_level(self, cigar_line):
        d = [level_surface_diameter(cigar_line, l, n_sigma=48, n_theta=24)
             for l in (5.0, 15.0, 30.0)]
        assert d[0] < d[1] < d[2]

    def test_lower_bounded_by_meridian(self, cigar_line):
        # the two pole-to-cut meridians are paths on the surface
        lam = 20.0
        sig_max = asymptotics._sigma_at_level(cigar_line, lam)
        assert level_surface_diameter(cigar_line, lam) >= sig_max

    def test_nonpositive_level_rejected(self, cigar_line):
        with pytest.raises(ValueError):
            level_surface_diameter(cigar_line, 0.0)


class TestPickPoints:
    def test_six_points_selected(self, seq):
        assert len(seq.points) == 6
        assert [p.j for p in seq.points] == [1, 2, 3, 4, 5, 6]

    def test_growth_and_ordering(self, seq):
        r2R = [p.r2R for p in seq.points]
        ratios = [p.lam_ratio for p in seq.points]
        assert all(np.diff(r2R) > 0)
        assert all(np.diff(ratios) > 0)
        assert all(p.delta == 0.0 for p in seq.points)

    def test_threshold_matches_schedule(self, seq):
        for p in seq.points:
            assert p.sigma_j == pytest.approx(math.sqrt(p.A / 0.5))
            assert p.r == pytest.approx(p.eps * p.sigma_j)

    def test_audit_passes(self, cigar_line, seq):
        res = audit_pick(cigar_line, seq)
        assert res["max_curvature_excess"] <= 1e-12
        assert res["r2R_increasing"]
        assert res["lam_ratio_increasing"]
        assert res["balls_disjoint"]

    def test_refusal_on_bounded_product(self, profile):
        with pytest.raises(RDSquaredBoundedError) as err:
            pick_points(profile)
        assert err.value.bound == pytest.approx(20.3, abs=0.5)

    def test_bad_schedules_rejected(self, cigar_line):
        with pytest.raises(ValueError):
            pick_points(cigar_line, eps_schedule=lambda j: 1.0)  # not decaying
        with pytest.raises(ValueError):
            pick_points(cigar_line, A_schedule=lambda j: 10.0 - j)
        with pytest.raises(ValueError):
            # A_j eps_j^2 must still increase
            pick_points(cigar_line, eps_schedule=lambda j: 1.0 / j,
                        A_schedule=lambda j: float(j))
