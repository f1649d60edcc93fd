import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diskwalk.domain import AnalyticDomain, GeometryError, make_domain, parse_complex


class TestConstruction:
    def test_builtin_goldens(self, cardioid, asym3):
        assert cardioid.r_in == pytest.approx(0.8, abs=1e-9)
        assert cardioid.r_out == pytest.approx(1.2, abs=1e-9)
        assert cardioid.reach_estimate == pytest.approx(0.229128, abs=1e-4)
        assert asym3.r_in > 0.7 and asym3.reach_estimate > 0.05

    def test_rejects_noninjective(self):
        with pytest.raises(ValueError):
            make_domain("1,0.6")    # F' root inside the disk
        with pytest.raises(ValueError):
            make_domain("0,1")      # c1 = 0

    def test_parse_complex(self):
        assert parse_complex("1.5") == 1.5
        assert parse_complex("0.1+0.2i") == complex(0.1, 0.2)
        assert parse_complex("-0.1i") == complex(0, -0.1)
        with pytest.raises(ValueError):
            parse_complex("abc")

    def test_make_domain_coeffs(self):
        d = make_domain("1,0.2")
        assert np.allclose(d.coeffs, [1, 0.2])
        with pytest.raises(ValueError):
            make_domain("")


class TestInside:
    def test_identity_examples(self, disk):
        assert disk.inside(0.5 + 0j) is True
        assert disk.inside(1.5 + 0j) is False

    def test_cardioid_band_examples(self, cardioid):
        z_in = complex(cardioid.map(0.999 * cmath.exp(1j)))
        z_out = complex(cardioid.map(1.001 * cmath.exp(1j)))
        assert cardioid.inside(z_in) is True
        assert cardioid.inside(z_out) is False

    def test_layered_equals_newton_everywhere(self, cardioid):
        rng = np.random.default_rng(42)
        pts = rng.uniform(-1.3, 1.3, (30_000, 2))
        zs = pts[:, 0] + 1j * pts[:, 1]
        for z in zs:
            layered = cardioid.inside(complex(z))
            try:
                newton = abs(cardioid.invert(complex(z), itmax=80)) < 1.0
            except GeometryError:
                newton = False  # far outside; layered must agree
            assert layered == newton, f"mismatch at {z}"


class TestProjection:
    def test_disk_outside_point(self, disk):
        p, l, n, t = disk.project_to_boundary(1.05 + 0j)
        assert p == pytest.approx(1.0 + 0j, abs=1e-12)
        assert l == pytest.approx(-0.05, abs=1e-12)
        assert n == pytest.approx(-1.0 + 0j, abs=1e-12)
        assert t == pytest.approx(0.0, abs=1e-12)

    def test_disk_inside_point(self, disk):
        _, l, _, _ = disk.project_to_boundary(0.9 + 0j)
        assert l == pytest.approx(0.1, abs=1e-12)

    def test_cardioid_constructed_point(self, cardioid):
        x = complex(cardioid.boundary_point(0.7))
        _, _, n0, _ = cardioid.project_to_boundary(x)
        z = x + 0.01 * n0
        p, l, n, t = cardioid.project_to_boundary(z)
        assert t == pytest.approx(0.7, abs=1e-6)
        assert l == pytest.approx(0.01, abs=1e-8)

    @given(st.floats(0, 2 * math.pi), st.floats(1e-4, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_recovery(self, t0, lfrac):
        dom = make_domain("cardioid")
        l0 = lfrac * dom.reach_estimate / 2
        x = complex(dom.boundary_point(t0))
        _, _, n0, _ = dom.project_to_boundary(x)
        p, l, n, t = dom.project_to_boundary(x + l0 * n0)
        assert min(abs(t - t0 % (2 * math.pi)),
                   2 * math.pi - abs(t - t0 % (2 * math.pi))) < 1e-6
        assert l == pytest.approx(l0, abs=1e-8)

    def test_beyond_reach_rejected(self, cardioid):
        with pytest.raises(GeometryError):
            cardioid.project_to_boundary(0j)


class TestInvert:
    def test_origin(self, cardioid):
        assert cardioid.invert(0j) == pytest.approx(0j, abs=1e-14)

    def test_identity_is_identity(self, disk):
        z = 0.3 - 0.6j
        assert disk.invert(z) == pytest.approx(z, abs=1e-13)

    def test_forward_inverse_roundtrip(self, cardioid):
        w = 0.3 + 0.4j
        assert cardioid.invert(complex(cardioid.map(w))) == pytest.approx(w, abs=1e-10)

    def test_roundtrip_grid(self, all_domains):
        rr, tt = np.meshgrid(np.linspace(0.05, 0.999, 25),
                             np.linspace(0, 2 * math.pi, 40))
        ws = (rr * np.exp(1j * tt)).ravel()
        for dom in all_domains.values():
            zs = dom.map(ws)
            err = max(abs(dom.invert(complex(z)) - w) for z, w in zip(zs, ws))
            assert err < 1e-10


class TestBoundaryModulus:
    def test_identity(self, disk):
        m, m1, m2 = disk.boundary_m(0.3)
        assert (m, m1, m2) == (1.0, 0.0, 0.0)

    def test_scaled_disk(self):
        d = make_domain("2")
        m, _, _ = d.boundary_m(1.0)
        assert m == pytest.approx(0.5, abs=1e-14)

    def test_cardioid_closed_form(self, cardioid):
        m, _, _ = cardioid.boundary_m(0.0)
        assert m == pytest.approx(1.0 / 1.4, abs=1e-12)

    @given(st.floats(0, 2 * math.pi))
    @settings(max_examples=40, deadline=None)
    def test_derivatives_match_finite_differences(self, t):
        dom = make_domain("asym3")
        eps = 1e-5
        m, m1, m2 = dom.boundary_m(t)
        mp, _, _ = dom.boundary_m(t + eps)
        mm, _, _ = dom.boundary_m(t - eps)
        assert m1 == pytest.approx((mp - mm) / (2 * eps), abs=2e-7, rel=1e-5)
        assert m2 == pytest.approx((mp - 2 * m + mm) / eps**2, abs=2e-4, rel=1e-3)


class TestGreensAndPoisson:
    def test_disk_greens_value(self, disk):
        assert disk.greens_gd(0.5 + 0j) == pytest.approx(-math.log(0.5) / (2 * math.pi),
                                                         abs=1e-12)
        with pytest.raises(ValueError):
            disk.greens_gd(0j)

    def test_disk_poisson_uniform(self, disk):
        t = np.linspace(0, 2 * math.pi, 9)
        assert np.allclose(disk.poisson_hd(t), 1.0 / (2 * math.pi), atol=1e-14)

    def test_normal_derivative_linearization(self, disk):
        # G_D(0, x + l n) = l H_D(0, x) + O(l^2)
        l = 0.01
        g = disk.greens_gd(complex(1.0 - l, 0.0))
        assert abs(g - l / (2 * math.pi)) <= 1e-4

    def test_poisson_pullback_mass(self, all_domains):
        t = (np.arange(4096) + 0.5) * (2 * math.pi / 4096)
        for dom in all_domains.values():
            speed = np.abs(dom.map_dw(np.exp(1j * t), 1))
            total = float(np.sum(dom.poisson_hd(t) * speed) * (2 * math.pi / 4096))
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_greens_positive_and_linear_decay(self, cardioid):
        x = complex(cardioid.boundary_point(1.1))
        _, _, n, _ = cardioid.project_to_boundary(x)
        ratios = []
        for l in (1e-2, 1e-3, 1e-4):
            g = cardioid.greens_gd(x + l * n)
            assert g > 0
            ratios.append(g / l)
        assert abs(ratios[1] / ratios[0] - 1) < 0.1
        assert abs(ratios[2] / ratios[1] - 1) < 0.1


class TestRecenter:
    def test_recentered_boundary_lies_on_original(self, cardioid):
        rec = cardioid.recenter(0.3 + 0.1j)
        t = np.linspace(0, 2 * math.pi, 64)
        zb = rec.boundary_point(t) + (0.3 + 0.1j)
        for z in zb:
            w = cardioid.invert(complex(z))
            assert abs(abs(w) - 1.0) < 1e-8

    def test_recenter_requires_interior(self, disk):
        with pytest.raises((ValueError, GeometryError)):
            disk.recenter(0.99 + 0j)
