import math

import numpy as np
import pytest

from diskwalk import density, harness
from diskwalk.config import MCEstimate, WalkConfig

RE2 = density.boundary_function("re2")
ONE = density.boundary_function("one")


class TestDiscreteIntegral:
    def test_constant_g_is_exact(self, disk, cardioid):
        for dom in (disk, cardioid):
            est = harness.discrete_integral(
                ONE, dom, WalkConfig(h=0.05, seed=1, samples=20_000, max_steps=10**8))
            assert est.mean == 1.0 and est.stderr == 0.0

    def test_half_boundary_indicator(self, disk):
        def upper(z):
            return (np.imag(z) > 0).astype(float)

        est = harness.discrete_integral(
            upper, disk, WalkConfig(h=0.05, seed=2, samples=100_000, max_steps=10**8))
        assert abs(est.mean - 0.5) < 4 * est.stderr

    def test_disk_re2_near_half(self, disk):
        h = 0.04
        est = harness.discrete_integral(
            RE2, disk, WalkConfig(h=h, seed=3, samples=200_000, max_steps=10**8))
        assert abs(est.mean - 0.5) < 4 * est.stderr + 0.1 * h

    def test_censoring_fails_loudly(self, disk):
        with pytest.raises(harness.RunFailure):
            harness.discrete_integral(
                RE2, disk, WalkConfig(h=0.05, seed=4, samples=2_000, max_steps=100))

    def test_jump_acceleration_is_unbiased(self, cardioid):
        a = harness.discrete_integral(
            RE2, cardioid, WalkConfig(h=0.02, seed=5, samples=250_000,
                                      max_steps=10**8), jumps=True)
        b = harness.discrete_integral(
            RE2, cardioid, WalkConfig(h=0.02, seed=6, samples=250_000,
                                      max_steps=10**8), jumps=False)
        assert abs(a.mean - b.mean) < 4 * a.combined_stderr(b)


class TestSweep:
    def test_single_h_degenerates_to_ratio(self, disk):
        sw = harness.correction_sweep(RE2, disk, [0.05], budget=50_000, seed=7,
                                      skip_pilot=True)
        assert sw.extrapolated_slope.mean == pytest.approx(float(sw.ratios[0]))
        assert sw.extrapolated_slope.stderr == pytest.approx(float(sw.ratio_stderrs[0]))

    def test_budget_gate(self, cardioid):
        with pytest.raises(harness.BudgetError):
            harness.correction_sweep(RE2, cardioid, [0.08, 0.04], budget=200_000,
                                     seed=8, pilot_samples=20_000)

    def test_h_range_validation(self, cardioid):
        with pytest.raises(ValueError):
            harness.correction_sweep(RE2, cardioid, [0.5], budget=1000, seed=9,
                                     skip_pilot=True)

    def test_weighted_intercept_matches_hand_lsq(self):
        h = np.array([0.08, 0.04, 0.02])
        y = np.array([0.1, 0.06, 0.05])
        s = np.array([0.01, 0.02, 0.04])
        slope, _ = harness._weighted_intercept(h, y, s, quadratic=False)
        w = 1 / s**2
        a_mat = np.array([[w.sum(), (w * h).sum()],
                          [(w * h).sum(), (w * h * h).sum()]])
        b_vec = np.array([(w * y).sum(), (w * h * y).sum()])
        coef = np.linalg.solve(a_mat, b_vec)
        cov = np.linalg.inv(a_mat)
        assert slope.mean == pytest.approx(coef[0], rel=1e-10)
        assert slope.stderr == pytest.approx(math.sqrt(cov[0, 0]), rel=1e-10)

    def test_quadratic_term_with_four_h(self, disk):
        sw = harness.correction_sweep(RE2, disk, [0.16, 0.08, 0.04, 0.02],
                                      budget=20_000, seed=10, skip_pilot=True)
        assert len(sw.h_values) == 4  # quadratic model engaged without error


class TestGreens:
    def test_bin_width_validation(self, disk):
        with pytest.raises(ValueError):
            harness.greens_compare(disk, 0.1, 1000, 0.15)

    def test_collar_requires_identity(self, cardioid):
        with pytest.raises(ValueError):
            harness.greens_compare(cardioid, 0.05, 1000, 0.1,
                                   collar_bands=[(0.4, 0.6)])

    def test_occupation_identity_and_center_bin(self, disk):
        gg = harness.greens_compare(disk, 0.1, 150_000, 0.2, seed=11)
        # every visited position lands in some bin: exact occupation identity
        assert gg.mass_ratio == pytest.approx(1.0, abs=1e-12)
        assert gg.mean_steps == pytest.approx(2.0 / 0.01, rel=0.1)
        i = int(np.argmin(np.abs(gg.centers - 0.5)))
        tol = 4 * gg.gh_stderr[i] + 0.5 * 0.1
        assert abs(gg.gh_scaled[i] - gg.gd8[i]) < tol
        # admissible bins exclude the origin and |z| <= sqrt(h)
        assert np.all(np.abs(gg.centers) > math.sqrt(0.1))

    def test_cardioid_greens_runs(self, cardioid):
        gg = harness.greens_compare(cardioid, 0.1, 40_000, 0.25, seed=12)
        assert gg.mass_ratio == pytest.approx(1.0, abs=1e-12)
        assert np.isfinite(gg.sup_diff)

    def test_collar_band_prediction(self, disk):
        gg = harness.greens_compare(disk, 0.1, 150_000, 0.2, seed=13,
                                    collar_bands=[(0.375, 0.625)],
                                    collar_samples=150_000)
        c = gg.collar[0]
        assert abs(c.gh_scaled - c.predicted) < 0.25 * abs(c.predicted)


class TestBoundaryLayer:
    def test_tangent_ball_is_interior(self, disk):
        # l = h: the averaging ball sits inside the domain, so the numeric
        # generator of a harmonic function vanishes (mean value property)
        bp = harness.boundary_layer_laplacian(disk, "re_z2", 0.0, 1.0, 0.1)
        assert bp.formula == pytest.approx(0.0, abs=1e-15)
        assert abs(bp.numeric) < 1e-10

    def test_formula_bracket_value(self, disk):
        # l = 0: bracket = (2/3) h^3 and df/dn = -2 at (1, 0)
        h = 0.1
        bp = harness.boundary_layer_laplacian(disk, "re_z2", 0.0, 0.0, h)
        assert bp.formula == pytest.approx(-2.0 * (2.0 / 3.0) * h / math.pi, rel=1e-12)

    def test_second_order_remainder(self, disk):
        r_big = harness.boundary_layer_laplacian(disk, "re_z2", 0.0, 0.5, 0.1)
        r_sml = harness.boundary_layer_laplacian(disk, "re_z2", 0.0, 0.5, 0.05)
        ratio = r_sml.diff / r_big.diff
        assert 0.15 <= ratio <= 0.4

    def test_unknown_function_rejected(self, disk):
        with pytest.raises(ValueError):
            harness.boundary_layer_laplacian(disk, "nope", 0.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            harness.boundary_layer_laplacian(disk, "re_z2", 0.0, 1.5, 0.1)

    def test_works_off_axis_and_on_cardioid(self, cardioid):
        bp = harness.boundary_layer_laplacian(cardioid, "re_z2", 1.2, 0.5, 0.05)
        # formula and numeric agree to the O(h^2) remainder scale
        assert abs(bp.diff) < 0.2 * abs(bp.formula) + 5e-3
