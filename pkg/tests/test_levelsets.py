import math

import numpy as np
import pytest

from solitonlab import levelsets
from solitonlab.levelsets import (
    FOUR_PI,
    area_ode_check,
    coarea_second_derivative_check,
    detII_monotonicity_scan,
    diameter_drop_bound,
    growth_tables,
    record,
    volume_record,
)


class TestRecord:
    def test_gauss_bonnet_closure(self, profile):
        for lam in np.linspace(0.5, 200.0, 25):
            rec = record(profile, lam)
            assert abs(rec.km_integral + rec.detII_integral - FOUR_PI) <= 1e-9

    def test_near_origin_limits(self, profile):
        rec = record(profile, 1e-4)
        assert rec.detII_integral == pytest.approx(FOUR_PI, rel=1e-3)
        assert rec.km_integral == pytest.approx(0.0, abs=1e-2)

    def test_shape_operator_identity(self, profile):
        # mean curvature times gradient equals twice the tangential Ricci
        for lam in (2.0, 20.0, 120.0):
            rec = record(profile, lam)
            sample = profile.query(rec.r)[-1]
            assert rec.mean_curvature * rec.grad_norm == pytest.approx(
                2.0 * sample.Ric_tan, rel=1e-9)

    def test_linear_area_plateau(self, profile):
        r100 = record(profile, 100.0).area / 100.0
        r200 = record(profile, 200.0).area / 200.0
        assert r100 == pytest.approx(r200, rel=0.10)

    def test_range_error_propagates(self, profile):
        with pytest.raises(Exception, match="r_max"):
            record(profile, profile.f_max + 5.0)


class TestFiniteDifferenceChecks:
    def test_area_flux_agreement(self, profile):
        for lam in (1.0, 50.0, 150.0):
            lhs, rhs = area_ode_check(profile, lam)
            assert lhs == pytest.approx(rhs, rel=1e-5)

    def test_area_flux_exceeds_twice_ambient_curvature(self, profile):
        for lam in np.linspace(1.0, 190.0, 15):
            _, rhs = area_ode_check(profile, lam)
            assert rhs > 2.0 * record(profile, lam).km_integral

    def test_coarea_agreement_and_positivity(self, profile):
        for lam in (1.0, 50.0, 150.0):
            lhs, rhs = coarea_second_derivative_check(profile, lam)
            assert lhs == pytest.approx(rhs, rel=1e-4)
            assert rhs > 0.0

    def test_second_order_in_step(self, profile):
        lam, h = 50.0, 0.05
        for fn in (area_ode_check, coarea_second_derivative_check):
            e1 = abs(np.subtract(*fn(profile, lam, h)))
            e2 = abs(np.subtract(*fn(profile, lam, h / 2.0)))
            assert e1 / e2 == pytest.approx(4.0, rel=0.15)

    def test_level_floor_enforced(self, profile):
        with pytest.raises(ValueError, match="floor"):
            coarea_second_derivative_check(profile, 0.1)

    def test_convexity_sandwich(self, profile):
        # 2 * ambient-curvature integral brackets the flux derivative
        for lam in (5.0, 50.0, 150.0):
            lhs, _ = coarea_second_derivative_check(profile, lam)
            rec = record(profile, lam)
            km2 = 2.0 * rec.km_integral
            delta = 1.0 - rec.grad_norm**3
            assert km2 < lhs <= km2 / (1.0 - delta) * (1 + 1e-6)


class TestMonotonicity:
    def test_detII_strictly_decreasing_200_levels(self, profile):
        grid = np.linspace(1.0, 200.0, 200)
        assert detII_monotonicity_scan(profile, grid) < 0.0

    def test_km_increasing_bounded(self, profile):
        grid = np.linspace(1.0, 200.0, 200)
        km = np.array([record(profile, l).km_integral for l in grid])
        assert np.all(np.diff(km) > 0)
        assert np.all((km > 0) & (km < FOUR_PI))

    def test_grid_must_increase(self, profile):
        with pytest.raises(ValueError):
            detII_monotonicity_scan(profile, [5.0, 3.0])


class TestVolume:
    def test_coarea_first_derivative(self, profile):
        h = 0.05
        for lam in (10.0, 80.0):
            dv = (volume_record(profile, lam + h).volume
                  - volume_record(profile, lam - h).volume) / (2 * h)
            assert dv == pytest.approx(
                volume_record(profile, lam).coarea_flux, rel=1e-5)

    def test_volume_increasing_convex(self, profile):
        lams = np.linspace(1.0, 200.0, 60)
        vols = np.array([volume_record(profile, l).volume for l in lams])
        assert np.all(np.diff(vols) > 0)
        assert np.all(np.diff(vols, 2) > 0)

    def test_flux_sandwich(self, profile):
        for lam in (2.0, 60.0, 180.0):
            rec = record(profile, lam)
            flux = volume_record(profile, lam).coarea_flux
            assert rec.area < flux <= rec.area / rec.grad_norm * (1 + 1e-12)


class TestGrowthTables:
    def test_schema_and_doubling(self, profile):
        tab = growth_tables(profile, np.linspace(50.0, 100.0, 11))
        assert set(tab) >= {"lambda", "r", "area", "volume", "diameter",
                            "R", "R_times_lambda", "area_doubling",
                            "volume_doubling"}
        assert np.all((tab["area_doubling"] >= 1.9)
                      & (tab["area_doubling"] <= 2.1))
        assert np.all((tab["volume_doubling"] >= 3.6)
                      & (tab["volume_doubling"] <= 4.4))

    def test_curvature_level_product_bounded_below(self, profile):
        tab = growth_tables(profile, np.linspace(50.0, 200.0, 16))
        assert np.all(tab["R_times_lambda"] > 0.5)


class TestDiameterDrop:
    def test_inequality_with_slack(self, profile):
        d_b, lower, beta = diameter_drop_bound(profile, 100.0, 90.0)
        assert d_b >= lower
        assert beta > 0

    def test_beta_tends_to_one(self, profile):
        betas = [diameter_drop_bound(profile, b + 1.0, b)[2]
                 for b in (50.0, 100.0, 180.0)]
        assert all(abs(b - 1.0) <= 0.1 for b in betas)
        assert betas[2] < betas[0]  # approaching 1 from above

    def test_degenerate_pair(self, profile):
        d_b, lower, _ = diameter_drop_bound(profile, 40.0, 40.0)
        assert d_b == pytest.approx(lower)

    def test_order_enforced(self, profile):
        with pytest.raises(ValueError):
            diameter_drop_bound(profile, 10.0, 20.0)
