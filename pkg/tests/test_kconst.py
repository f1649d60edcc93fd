import math

import numpy as np
import pytest

from diskwalk import kconst, walk
from diskwalk.config import HALFPLANE_MAX_STEPS, WalkConfig

CFG = WalkConfig(h=1.0, seed=20240810, samples=30_000, max_steps=HALFPLANE_MAX_STEPS)


class TestWeights:
    def test_constant_term(self):
        assert kconst.K_CONSTANT_TERM == pytest.approx(16 / (45 * math.pi), abs=1e-15)
        assert kconst.K_CONSTANT_TERM == pytest.approx(0.113176848, abs=1e-9)

    def test_endpoint_values(self):
        assert kconst.integrand_weight(0.0) == pytest.approx(0.0, abs=1e-15)
        assert kconst.integrand_weight(math.pi / 2) == pytest.approx(2.0 / 3.0, abs=1e-14)

    def test_quarter_pi(self):
        want = 0.5 - (0.25 / 3.0) - (math.pi / 4) * 0.5
        assert kconst.integrand_weight(math.pi / 4) == pytest.approx(want, abs=1e-15)
        assert kconst.integrand_weight(math.pi / 4) == pytest.approx(0.0239676, abs=1e-7)


class TestExitFunctional:
    def test_positive_height_required(self):
        with pytest.raises(ValueError):
            kconst.exit_functional(0.0, CFG)

    def test_large_height_near_limit(self):
        est = kconst.exit_functional(32.0, CFG.with_(samples=200_000))
        assert abs(est.mean - 0.26477) <= max(4 * est.stderr, 1e-3)

    def test_one_step_renewal_identity(self):
        # v(y) = E[(y+xi)^-] + E[v((y+xi)^+)] for a semicircle step xi:
        # estimate v on a grid, then check the identity at y = 0.5.
        ys = np.linspace(0.05, 3.5, 36)
        cfg = CFG.with_(samples=40_000)
        vhat = np.array([kconst.exit_functional(float(y), cfg.with_(
            seed=kconst.derive_seed(cfg.seed, 7_000, i))).mean
            for i, y in enumerate(ys)])
        y0 = 0.5
        xg, wg = np.polynomial.legendre.leggauss(400)
        t = xg  # semicircle support [-1, 1]
        w = wg * (2.0 / math.pi) * np.sqrt(1.0 - t**2)
        landing = y0 + t
        exited = landing <= 0
        v_interp = np.interp(landing, ys, vhat)
        # beyond the grid the functional is already flat near K
        v_interp = np.where(landing > ys[-1], vhat[-1], v_interp)
        rhs = float(np.sum(w * np.where(exited, -landing, v_interp)))
        v0 = kconst.exit_functional(y0, cfg.with_(seed=321)).mean
        assert abs(v0 - rhs) < 6e-3

    def test_stderr_scaling_with_budget(self):
        e1 = kconst.exit_functional(0.7, CFG.with_(samples=40_000))
        e2 = kconst.exit_functional(0.7, CFG.with_(samples=80_000, seed=777))
        assert e2.stderr / e1.stderr == pytest.approx(1 / math.sqrt(2), rel=0.2)


class TestKQuadrature:
    def test_requires_enough_nodes(self):
        with pytest.raises(ValueError):
            kconst.k_by_quadrature(4, CFG)

    def test_value_and_stderr_propagation(self):
        kb = kconst.k_by_quadrature(16, CFG)
        # propagated stderr identity
        coef = 8 / math.pi * kb.node_weights * kb.node_integrand_weights
        want = math.sqrt(float(np.sum((coef * np.array(
            [e.stderr for e in kb.node_estimates])) ** 2)))
        assert kb.k_value.stderr == pytest.approx(want, rel=1e-12)
        # endpoint closed forms of the integrand weight
        assert kconst.integrand_weight(0.0) == 0.0
        # desk-budget sanity against the reference value
        assert abs(kb.k_value.mean - 0.2647664) < max(4 * kb.k_value.stderr, 2e-3)

    def test_node_doubling_consistency(self):
        k32 = kconst.k_by_quadrature(32, CFG.with_(samples=20_000))
        k64 = kconst.k_by_quadrature(64, CFG.with_(samples=20_000))
        tol = 3 * math.hypot(k32.k_value.stderr, k64.k_value.stderr)
        assert abs(k32.k_value.mean - k64.k_value.mean) < tol

    def test_budget_doubling_shrinks_stderr(self):
        a = kconst.k_by_quadrature(8, CFG.with_(samples=30_000))
        b = kconst.k_by_quadrature(8, CFG.with_(samples=60_000, seed=99))
        assert b.k_value.stderr / a.k_value.stderr == pytest.approx(
            1 / math.sqrt(2), rel=0.2)

    def test_pilot_allocation(self):
        kb = kconst.k_by_quadrature(8, CFG.with_(samples=20_000),
                                    allocate="pilot", pilot_samples=5_000)
        assert kb.node_samples.min() >= 1000
        assert kb.node_samples.sum() == pytest.approx(8 * 20_000, rel=0.05)
        assert abs(kb.k_value.mean - 0.2647664) < max(4 * kb.k_value.stderr, 5e-3)

    def test_scaling_invariance_in_h(self):
        lam = 0.5
        e1 = kconst.exit_functional(0.8, CFG.with_(samples=120_000))
        e2 = kconst.exit_functional(lam * 0.8, CFG.with_(h=lam, samples=120_000,
                                                         seed=4242))
        tol = 4 * math.hypot(e1.stderr, e2.stderr / lam)
        assert abs(e1.mean - e2.mean / lam) < tol


class TestKLimit:
    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            kconst.k_by_limit([1.0, 1.0], CFG)
        with pytest.raises(ValueError):
            kconst.k_by_limit([-1.0, 2.0], CFG)

    def test_terminal_near_golden(self):
        res = kconst.k_by_limit([4, 16, 32], CFG.with_(samples=150_000))
        term = res.terminal
        assert abs(term.mean - 0.2647664) < max(4 * term.stderr, 1e-3)
        assert len(res.increments) == 2

    def test_increments_shrink_with_height(self):
        # diagnostic: increments between consecutive heights fade into the
        # Monte Carlo noise beyond y ~ 4
        res = kconst.k_by_limit([1, 2, 4, 8, 16], CFG.with_(samples=200_000))
        noise = 4 * max(e.stderr for e in res.estimates)
        assert abs(res.increments[0]) > abs(res.increments[-1]) - noise
        assert all(abs(i) < 6e-3 for i in res.increments[1:])

    def test_v1_exceeds_terminal(self):
        # the functional is not monotone: v(1) lies above the limit
        res = kconst.k_by_limit([1, 32], CFG.with_(samples=400_000))
        v1, v32 = res.estimates
        assert v1.mean - v32.mean > 3 * v1.combined_stderr(v32)
