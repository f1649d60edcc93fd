"""Sampling primitives and trajectory drivers for the disk-step walk.

Public sampling ops use the branch-free polar draw (two uniforms per
step).  The production kernels in _kernels.py sample the identical laws
by rejection from the bounding square, which is ~2.5x faster on the hot
path; the equivalence is covered by distribution tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import (MAX_BAD_FRACTION, MCEstimate, SHARD_SIZE, WalkConfig,
                     WelfordState, merge_shard_moments)
from .domain import AnalyticDomain, GeometryError
from .rng import stream_key_py, uniforms

TWO_PI = 2.0 * math.pi


def _seed64(seed: int) -> np.uint64:
    return np.uint64(seed & 0xFFFFFFFFFFFFFFFF)


def set_threads(n: int) -> int:
    """Set the numba worker count (results never depend on it)."""
    import numba

    cap = numba.config.NUMBA_NUM_THREADS
    n = max(1, min(int(n), cap))
    numba.set_num_threads(n)
    return n


class RngStream:
    """Counter-based uniform stream for one (seed, task, trajectory)."""

    __slots__ = ("key", "ctr")

    def __init__(self, seed: int, task_id: int = 0, traj_id: int = 0):
        self.key = stream_key_py(seed, task_id, traj_id)
        self.ctr = 0

    def uniform(self) -> float:
        from .rng import u01

        v = float(u01(np.uint64(self.key), np.uint64(self.ctr)))
        self.ctr += 1
        return v


def sample_step(stream: RngStream, h: float) -> complex:
    """One step, uniform in the open disk of radius h (polar; 2 draws)."""
    u1 = stream.uniform()
    u2 = stream.uniform()
    r = h * math.sqrt(u1)
    return complex(r * math.cos(TWO_PI * u2), r * math.sin(TWO_PI * u2))


def sample_im_increment(stream: RngStream) -> float:
    """Semicircle increment: imaginary part of a unit disk draw."""
    return sample_step(stream, 1.0).imag


def sample_steps_array(seed: int, n: int, h: float = 1.0, task_id: int = 0) -> np.ndarray:
    """Vector of n polar disk draws (one trajectory id per draw)."""
    u = uniforms(seed, task_id, 0, 2 * n)
    r = h * np.sqrt(u[0::2])
    ang = TWO_PI * u[1::2]
    return r * np.exp(1j * ang)


# ---------------------------------------------------------------------------
# half-plane runs
# ---------------------------------------------------------------------------


@dataclass
class HalfplaneRun:
    """Recorded overshoots of the half-plane exit (NaN where censored)."""

    overshoots: np.ndarray
    censored: int
    steps_total: int | None = None

    @property
    def values(self) -> np.ndarray:
        return self.overshoots[~np.isnan(self.overshoots)]

    def censor_fraction(self) -> float:
        return self.censored / len(self.overshoots)


def _scaled_height(start_height: float, cfg: WalkConfig) -> float:
    if start_height <= 0:
        raise ValueError(f"start height must be > 0, got {start_height}")
    return start_height / cfg.h


def run_halfplane_exit(start_height: float, cfg: WalkConfig,
                       accelerate: bool = True) -> HalfplaneRun:
    """Per-trajectory |Im(S_T)| at first exit of the upper half-plane.

    The walk law scales exactly with h, so the unit-step engine runs from
    start_height/h and overshoots are multiplied by h.
    """
    y0 = _scaled_height(start_height, cfg)
    ov = np.empty(cfg.samples, dtype=np.float64)
    status = np.empty(cfg.samples, dtype=np.int8)
    _kernels.halfplane_record(_seed64(cfg.seed), cfg.samples, y0, cfg.max_steps,
                              accelerate, SHARD_SIZE, ov, status)
    return HalfplaneRun(ov * cfg.h, int((status == _kernels.STATUS_CENSORED).sum()))


def run_halfplane_exit_2d(start_height: float, cfg: WalkConfig) -> HalfplaneRun:
    """Full 2-d oracle for the half-plane exit (polar sampling, no jumps)."""
    y0 = _scaled_height(start_height, cfg)
    ov = np.empty(cfg.samples, dtype=np.float64)
    status = np.empty(cfg.samples, dtype=np.int8)
    _kernels.halfplane2d_record(_seed64(cfg.seed), cfg.samples, y0, cfg.max_steps,
                                SHARD_SIZE, ov, status)
    return HalfplaneRun(ov * cfg.h, int((status == _kernels.STATUS_CENSORED).sum()))


def halfplane_overshoot_mean(start_height: float, cfg: WalkConfig,
                             accelerate: bool = True,
                             censor_tolerance: float = MAX_BAD_FRACTION) -> MCEstimate:
    """Streaming MCEstimate of E^{iy}|Im(S_T)| (h from cfg)."""
    y0 = _scaled_height(start_height, cfg)
    n_shards = (cfg.samples + SHARD_SIZE - 1) // SHARD_SIZE
    out = np.zeros((n_shards, 5), dtype=np.float64)
    _kernels.halfplane_reduce(_seed64(cfg.seed), cfg.samples, y0, cfg.max_steps,
                              accelerate, SHARD_SIZE, out)
    state = merge_shard_moments(out[:, :3])
    censored = int(out[:, 3].sum())
    est = state.estimate(censored)
    frac = censored / cfg.samples
    if frac > censor_tolerance:
        raise RuntimeError(
            f"censored fraction {frac:.3g} exceeds tolerance {censor_tolerance:.3g} "
            f"(max_steps={cfg.max_steps})")
    return MCEstimate(est.mean * cfg.h, est.stderr * cfg.h, est.n, censored)


# ---------------------------------------------------------------------------
# domain runs
# ---------------------------------------------------------------------------


@dataclass
class DomainRun:
    """First-exit data for a batch of trajectories in an analytic domain."""

    boundary_t: np.ndarray     # projected boundary parameter (NaN if failed)
    status: np.ndarray         # per-trajectory status codes
    exit_points: np.ndarray | None
    steps_total: int
    censored: int
    geometry_errors: int

    @property
    def n(self) -> int:
        return len(self.status)

    def ok(self) -> np.ndarray:
        return self.status == _kernels.STATUS_OK

    def bad_fraction(self) -> float:
        return (self.censored + self.geometry_errors) / self.n


def _domain_kernel_args(domain: AnalyticDomain, h: float, jumps: bool):
    r_in = domain.r_in
    # jump eligible when the certified distance bound exceeds this
    thresh = (4.5 * math.sqrt(_kernels.JUMP_MIN_K) + 1.0) * h if jumps else 0.0
    tol = 1e-11 * domain.diam
    return (domain.coeffs, domain.is_identity, r_in, r_in * r_in * (1 - 1e-12),
            domain.r_out * domain.r_out, domain.lut_t, domain.lut_br,
            domain.class_grid, domain.grid_gs, domain.grid_gn,
            thresh, tol * tol)


def run_domain_exit(start: complex, domain: AnalyticDomain, cfg: WalkConfig,
                    record_points: bool = True, jumps: bool = True) -> DomainRun:
    """Run cfg.samples trajectories from `start` until first exit of the domain."""
    if not domain.inside(complex(start)):
        raise ValueError(f"start point {start!r} is not inside the domain")
    if cfg.h > domain.reach_estimate:
        raise ValueError(
            f"step radius h={cfg.h} exceeds the reach estimate "
            f"{domain.reach_estimate:.4g}; the boundary projection would be ambiguous")
    (coeffs, is_ident, r_in, r_in_sq, r_out_sq, lut_t, lut_br,
     grid, gs, gn, thresh, tol_sq) = _domain_kernel_args(domain, cfg.h, jumps)
    n = cfg.samples
    t_out = np.empty(n, dtype=np.float64)
    status = np.empty(n, dtype=np.int8)
    points = np.empty(n if record_points else 0, dtype=np.complex128)
    n_shards = (n + SHARD_SIZE - 1) // SHARD_SIZE
    shard_steps = np.zeros(n_shards, dtype=np.int64)
    _kernels.domain_record(_seed64(cfg.seed), n, coeffs, is_ident,
                           float(np.real(start)), float(np.imag(start)),
                           cfg.h, cfg.max_steps, r_in, r_in_sq, r_out_sq,
                           lut_t, lut_br, grid, gs, gn, thresh, tol_sq,
                           SHARD_SIZE, t_out, status, points, shard_steps)
    return DomainRun(
        boundary_t=np.mod(t_out, TWO_PI),
        status=status,
        exit_points=points if record_points else None,
        steps_total=int(shard_steps.sum()),
        censored=int((status == _kernels.STATUS_CENSORED).sum()),
        geometry_errors=int((status == _kernels.STATUS_GEOMETRY).sum()),
    )


def shard_estimate(values: np.ndarray, ok: np.ndarray) -> MCEstimate:
    """MCEstimate of `values[ok]` reduced in fixed shard order."""
    n = len(values)
    state = WelfordState()
    bad = 0
    for lo in range(0, n, SHARD_SIZE):
        hi = min(lo + SHARD_SIZE, n)
        v = values[lo:hi]
        m = ok[lo:hi]
        k = int(m.sum())
        bad += (hi - lo) - k
        if k == 0:
            continue
        vv = v[m]
        mean = float(vv.sum()) / k
        m2 = float(((vv - mean) ** 2).sum())
        state.merge(WelfordState(k, mean, m2))
    return state.estimate(censored=bad)


# ---------------------------------------------------------------------------
# slow python reference walkers (test oracles)
# ---------------------------------------------------------------------------


def reference_halfplane_path(start_height: float, h: float, seed: int,
                             task_id: int = 0, traj_id: int = 0,
                             max_steps: int = 10**6) -> list[float]:
    """Exact 1-d path of Im(S_n) until exit, polar sampling (oracle)."""
    stream = RngStream(seed, task_id, traj_id)
    y = start_height
    path = [y]
    for _ in range(max_steps):
        y += h * sample_im_increment(stream)
        path.append(y)
        if y <= 0:
            return path
    raise RuntimeError("reference walk hit the step cap")


def reference_domain_path(start: complex, domain: AnalyticDomain, h: float,
                          seed: int, task_id: int = 0, traj_id: int = 0,
                          max_steps: int = 10**6) -> list[complex]:
    """Exact 2-d path until exit, inside() test every step (oracle)."""
    stream = RngStream(seed, task_id, traj_id)
    z = complex(start)
    path = [z]
    for _ in range(max_steps):
        z += sample_step(stream, h)
        path.append(z)
        if not domain.inside(z):
            return path
    raise RuntimeError("reference walk hit the step cap")
