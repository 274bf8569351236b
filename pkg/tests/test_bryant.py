import json
import math

import numpy as np
import pytest

from solitonlab import bryant
from solitonlab.bryant import ProfileRangeError, SolitonProfile, integrate, seed


class TestSeed:
    def test_series_values_match_expansion(self):
        sd = seed(eps=1e-4)
        w, x, f, u = sd.state
        assert x == pytest.approx(1.0 - 1e-8 / 12.0, abs=1e-15)
        assert u == pytest.approx(1e-4 / 3.0, abs=1e-12)
        assert w == pytest.approx(1e-4, rel=1e-8)
        assert f == pytest.approx(0.5 * (1e-8) / 3.0, rel=1e-7)

    def test_consistency_residual_small(self):
        assert seed().consistency_residual() < 1e-12

    def test_pole_limit(self):
        sd = seed(eps=1e-9)
        w, x, f, u = sd.state
        assert w == pytest.approx(0.0, abs=1e-8)
        assert x == pytest.approx(1.0, abs=1e-15)
        assert f == pytest.approx(0.0, abs=1e-15)
        assert u == pytest.approx(0.0, abs=1e-9)

    def test_radius_range_enforced(self):
        with pytest.raises(ValueError):
            seed(eps=2e-3)
        with pytest.raises(ValueError):
            seed(eps=0.0)


class TestIntegration:
    def test_conserved_drift_budget(self, profile):
        assert profile.drift <= 1e-9

    def test_monotone_invariants_on_grid(self, profile):
        assert np.all(profile.w > 0)
        assert np.all(np.diff(profile.wp) < 0)
        assert np.all(profile.wp <= 1.0)
        assert np.all(np.diff(profile.fp) > 0)
        assert np.all(profile.fp < 1.0)
        assert np.all(np.diff(profile.f) > 0)

    def test_far_field_state(self, profile):
        # gradient saturates while the warp opens like a square root
        assert profile.fp_at(200.0) >= 0.9
        assert profile.wp_at(200.0) <= 0.2
        ratio = [float(profile.w_at(r)) / math.sqrt(r) for r in (150, 200)]
        assert ratio[0] == pytest.approx(ratio[1], rel=0.02)

    def test_tangential_equation_is_shape_identity(self, profile):
        # f' w'/w equals the tangential Ricci at every node past the pole
        mask = profile.grid >= 0.5
        g = profile.grid[mask]
        w, x, u = profile.w_at(g), profile.wp_at(g), profile.fp_at(g)
        wpp = bryant._second_derivatives(w, x, u)[0]
        ric_tan = -wpp / w + (1.0 - x * x) / (w * w)
        assert np.max(np.abs(u * x / w - ric_tan)) <= 1e-9

    def test_scalar_curvature_strictly_decreasing(self, profile):
        g = profile.grid[profile.grid >= 0.2]
        assert np.all(np.diff(profile.scalar_curvature(g)) < 0)

    def test_tolerance_halving_convergence(self, profile):
        finer = integrate(seed(), r_max=120.0, tol=5e-11)
        assert abs(finer.w_at(100.0) - profile.w_at(100.0)) <= 100 * 1e-10

    def test_seed_radius_halving(self, profile):
        halved = integrate(seed(eps=5e-4), r_max=120.0)
        assert abs(halved.w_at(100.0) - profile.w_at(100.0)) <= 1e-7

    def test_homothety_covariance(self, profile):
        scaled = integrate(seed(c=2.0 / 3.0), r_max=80.0)
        rt2 = math.sqrt(2.0)
        for r in (1.0, 5.0, 20.0, 40.0, 80.0):
            assert scaled.w_at(r / rt2) == pytest.approx(
                float(profile.w_at(r)) / rt2, abs=1e-6)
            assert scaled.f_at(r / rt2) == pytest.approx(
                float(profile.f_at(r)), abs=1e-6)

    def test_rmax_and_tol_validated(self):
        with pytest.raises(ValueError):
            integrate(seed(), r_max=5.0)
        with pytest.raises(ValueError):
            integrate(seed(), r_max=50.0, tol=1e-3)


class TestQueries:
    def test_seed_boundary_matches(self, profile):
        sd = seed()
        assert float(profile.w_at(sd.eps)) == pytest.approx(
            sd.state[0], rel=1e-12)
        assert float(profile.fp_at(sd.eps)) == pytest.approx(
            sd.state[3], rel=1e-10)

    def test_curvature_normalized_at_origin(self, profile):
        assert float(profile.scalar_curvature(1e-5)) == pytest.approx(
            1.0, rel=1e-4)
        *_, sample = profile.query(0.01)
        assert sample.R == pytest.approx(1.0, rel=1e-3)

    def test_query_matches_reintegration(self, profile):
        r_stop = 77.7
        fresh = integrate(seed(), r_max=r_stop)
        assert abs(float(profile.w_at(r_stop)) - fresh.w[-1]) <= 1e-8
        assert abs(float(profile.f_at(r_stop)) - fresh.f[-1]) <= 1e-8

    def test_range_errors(self, profile):
        with pytest.raises(ProfileRangeError):
            profile.w_at(profile.r_max + 1.0)
        with pytest.raises(ProfileRangeError):
            profile.w_at(-0.5)

    def test_residual_independent_stencil(self, profile):
        for r in (1.0, 10.0, 100.0, 200.0):
            res = profile.residual_at(r)
            assert max(abs(res[0]), abs(res[1])) <= 1e-8

    def test_interpolation_midpoints_stay_conserved(self, profile):
        mids = profile.grid[:-1] + 0.05
        mids = mids[mids > 0.5]
        vals = profile.scalar_curvature(mids) + profile.fp_at(mids) ** 2
        assert np.max(np.abs(vals - 1.0)) <= 1e-9


class TestInvertPotential:
    def test_zero_level(self, profile):
        assert profile.invert_potential(0.0) == 0.0

    def test_grid_node_round_trip(self, profile):
        idx = len(profile.grid) // 2
        r0, lam = profile.grid[idx], profile.f[idx]
        assert profile.invert_potential(lam) == pytest.approx(r0, abs=1e-9)

    def test_small_level_series(self, profile):
        lam = 1e-5
        assert profile.invert_potential(lam) == pytest.approx(
            math.sqrt(6.0 * lam), rel=1e-4)

    def test_beyond_range_instructs_longer_run(self, profile):
        with pytest.raises(ProfileRangeError, match="r_max"):
            profile.invert_potential(profile.f_max + 1.0)

    def test_monotone_round_trip(self, profile):
        for lam in (0.5, 5.0, 50.0, 150.0):
            r = profile.invert_potential(lam)
            assert float(profile.f_at(r)) == pytest.approx(lam, abs=1e-9)


class TestPersistence:
    def test_round_trip_identical_queries(self, profile, tmp_path):
        path = tmp_path / "profile.json"
        profile.save(path)
        loaded = SolitonProfile.load(path)
        for r in (0.5, 12.34, 123.45):
            assert float(loaded.w_at(r)) == float(profile.w_at(r))
            assert float(loaded.f_at(r)) == float(profile.f_at(r))
        assert loaded.drift == pytest.approx(profile.drift, rel=1e-6)

    def test_schema_fields(self, profile):
        data = profile.to_json()
        assert data["normalization"]["R_origin"] == 1.0
        assert set(data["grid"][0]) == {"r", "w", "wp", "f", "fp"}
        json.dumps(data)  # serializable
