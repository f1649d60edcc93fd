"""End-to-end experiments: correction-slope sweeps, Green's-function
comparison, boundary-layer Laplacian checks.

Everything stochastic goes through the walk engine's sharded kernels, so
runs are reproducible for any worker count; reductions happen in fixed
shard order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .config import (HALFPLANE_MAX_STEPS, MAX_BAD_FRACTION, MCEstimate,
                     SHARD_SIZE, WalkConfig, WelfordState)
from .density import K_GOLDEN, continuous_integral, predicted_slope
from .domain import AnalyticDomain
from .kconst import derive_seed, exit_functional
from .walk import _seed64, run_domain_exit, shard_estimate

_TAG_SWEEP = 201
_TAG_PILOT = 202
_TAG_GREENS = 203
_TAG_COLLAR = 204

#: absolute floor for the ratio-stderr feasibility rule of correction_sweep
RATIO_STDERR_FLOOR = 5e-3


class RunFailure(RuntimeError):
    """Censoring or geometry-error fraction above tolerance."""


class BudgetError(RuntimeError):
    """Requested budget cannot resolve the first-order signal."""


# ---------------------------------------------------------------------------
# discrete harmonic-measure integral
# ---------------------------------------------------------------------------


def discrete_integral(g: Callable, dom: AnalyticDomain, cfg: WalkConfig,
                      jumps: bool = True) -> MCEstimate:
    """Monte Carlo Int g d omega_h(0, .; D): mean of g at projected exits."""
    run = run_domain_exit(0j, dom, cfg, record_points=False, jumps=jumps)
    if run.bad_fraction() > MAX_BAD_FRACTION:
        raise RunFailure(
            f"bad trajectory fraction {run.bad_fraction():.3g} "
            f"(censored {run.censored}, geometry {run.geometry_errors})")
    ok = run.ok()
    vals = np.zeros(run.n)
    vals[ok] = g(dom.boundary_point(run.boundary_t[ok]))
    return shard_estimate(vals, ok)


# ---------------------------------------------------------------------------
# correction sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    h_values: np.ndarray
    mc_integrals: list[MCEstimate]
    exact_integral: float
    ratios: np.ndarray
    ratio_stderrs: np.ndarray
    extrapolated_slope: MCEstimate
    predicted_slope: float
    fit_curvature: float = 0.0


def _weighted_intercept(h, y, sig, quadratic: bool) -> tuple[MCEstimate, float]:
    h = np.asarray(h, float)
    y = np.asarray(y, float)
    sig = np.asarray(sig, float)
    if len(h) == 1:
        return MCEstimate(float(y[0]), float(sig[0]), 1), 0.0
    cols = [np.ones_like(h), h] + ([h * h] if quadratic else [])
    a = np.column_stack(cols) / sig[:, None]
    b = y / sig
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    cov = np.linalg.inv(a.T @ a)
    slope = MCEstimate(float(coef[0]), float(math.sqrt(cov[0, 0])), len(h))
    return slope, float(coef[2]) if quadratic else 0.0


def correction_sweep(g: Callable, dom: AnalyticDomain, h_values: Sequence[float],
                     budget: int, seed: int = 0, pilot_samples: int = 10**5,
                     k_value: float = K_GOLDEN, grid_size: int = 512,
                     skip_pilot: bool = False, max_steps: int = 10**9) -> SweepResult:
    """Measure ( Int g d omega_h - Int g d omega ) / h and extrapolate to h = 0."""
    hs = np.asarray(sorted(float(h) for h in h_values), float)[::-1]
    if np.any(hs <= 0) or hs[0] > dom.reach_estimate:
        raise ValueError("h values must lie in (0, reach_estimate]")
    exact = continuous_integral(g, dom, grid_size)
    pred = predicted_slope(g, dom, k_value, grid_size)

    if not skip_pilot:
        pc = WalkConfig(h=float(hs[-1]), seed=derive_seed(seed, _TAG_PILOT),
                        samples=pilot_samples, max_steps=max_steps)
        pilot = discrete_integral(g, dom, pc)
        sigma_g = pilot.stderr * math.sqrt(pilot.n_effective)
        for h in hs:
            projected = sigma_g / math.sqrt(budget) / h
            allowed = 0.1 * abs(pred) + RATIO_STDERR_FLOOR
            if projected > allowed:
                raise BudgetError(
                    f"budget {budget:.3g} gives ratio stderr {projected:.3g} at "
                    f"h={h}, above 0.1|predicted_slope| + {RATIO_STDERR_FLOOR} = "
                    f"{allowed:.3g}")

    mcs = []
    for i, h in enumerate(hs):
        cfg = WalkConfig(h=float(h), seed=derive_seed(seed, _TAG_SWEEP, i),
                         samples=int(budget), max_steps=max_steps)
        mcs.append(discrete_integral(g, dom, cfg))
    ratios = np.array([(e.mean - exact) / h for e, h in zip(mcs, hs)])
    sigs = np.array([e.stderr / h for e, h in zip(mcs, hs)])
    slope, curv = _weighted_intercept(hs, ratios, sigs, quadratic=len(hs) >= 4)
    return SweepResult(hs, mcs, exact, ratios, sigs, slope, pred, curv)


# ---------------------------------------------------------------------------
# Green's-function comparison
# ---------------------------------------------------------------------------


@dataclass
class CollarBand:
    l_lo: float                 # in units of h
    l_hi: float
    gh_scaled: float            # h^2 * Ghat averaged over the band
    gh_stderr: float
    predicted: float            # 8 G_D + 8 H_D h v(l/h), band-averaged
    visits: int


@dataclass
class GreensGrid:
    h: float
    centers: np.ndarray          # complex bin centers (admissible bins)
    area: float
    gh_scaled: np.ndarray
    gh_stderr: np.ndarray
    gd8: np.ndarray
    diff: np.ndarray
    visits: np.ndarray
    sup_diff: float
    mean_steps: float
    mass_ratio: float            # sum Ghat * area / mean trajectory length
    low_visit_bins: int
    collar: list[CollarBand] = field(default_factory=list)
    censored: int = 0
    geometry_errors: int = 0


def greens_compare(dom: AnalyticDomain, h: float, budget: int, bin_width: float,
                   seed: int = 0, collar_bands: Sequence[tuple[float, float]] = (),
                   collar_samples: int = 10**6) -> GreensGrid:
    """Occupation estimate of G_h against 8 G_D on square bins.

    Admissible bins lie fully inside D, exclude |z| <= sqrt(h) and the
    origin bin (the k = 0 delta).  Collar bands are radial shells at
    depth l/h in [lo, hi), identity map only.
    """
    if bin_width < 2.0 * h:
        raise ValueError("bin width must be at least 2h")
    if collar_bands and not dom.is_identity:
        raise ValueError("collar bands are implemented for the unit disk only")
    half = dom.r_out + bin_width
    nx = ny = int(math.ceil(2.0 * half / bin_width))
    bx0 = by0 = -0.5 * nx * bin_width
    n_bins = nx * ny

    n_shards = (budget + SHARD_SIZE - 1) // SHARD_SIZE
    bin_counts = np.zeros((n_shards, n_bins), dtype=np.int64)
    collar_lo = np.array([b[0] for b in collar_bands], float)
    collar_hi = np.array([b[1] for b in collar_bands], float)
    collar_counts = np.zeros((n_shards, max(len(collar_bands), 1)), dtype=np.int64)
    shard_steps = np.zeros(n_shards, dtype=np.int64)
    shard_cen = np.zeros(n_shards, dtype=np.int64)
    shard_geom = np.zeros(n_shards, dtype=np.int64)
    tol = 1e-11 * dom.diam
    _kernels.domain_occupation(
        _seed64(derive_seed(seed, _TAG_GREENS)), budget, dom.coeffs,
        dom.is_identity, h, 10**9,
        dom.r_in * dom.r_in * (1 - 1e-12), dom.r_out * dom.r_out,
        dom.lut_t, dom.lut_br, tol * tol, SHARD_SIZE,
        bx0, by0, bin_width, nx, ny, collar_lo, collar_hi,
        bin_counts, collar_counts, shard_steps, shard_cen, shard_geom)

    censored = int(shard_cen.sum())
    geom = int(shard_geom.sum())
    if (censored + geom) / budget > MAX_BAD_FRACTION:
        raise RunFailure(f"bad trajectory fraction: censored {censored}, "
                         f"geometry {geom} of {budget}")

    counts = bin_counts.sum(axis=0)
    area = bin_width * bin_width
    mean_steps = float(shard_steps.sum()) / budget
    mass_ratio = float(counts.sum()) / budget / mean_steps

    # admissible bins: fully inside, |center| > sqrt(h), not the origin bin
    jj, ii = np.divmod(np.arange(n_bins), nx)
    cx = bx0 + (ii + 0.5) * bin_width
    cy = by0 + (jj + 0.5) * bin_width
    centers = cx + 1j * cy
    if dom.is_identity:
        far = np.hypot(np.abs(cx) + 0.5 * bin_width, np.abs(cy) + 0.5 * bin_width)
        fully_inside = far < 1.0
    else:
        fully_inside = np.zeros(n_bins, dtype=bool)
        for b in range(n_bins):
            if counts[b] == 0:
                continue
            corners = [centers[b] + 0.5 * bin_width * (sx + 1j * sy)
                       for sx in (-1, 1) for sy in (-1, 1)]
            fully_inside[b] = all(dom.inside(c) for c in corners)
    origin_bin = (np.abs(np.real(centers)) < 0.5 * bin_width + 1e-12) & \
                 (np.abs(np.imag(centers)) < 0.5 * bin_width + 1e-12)
    admissible = fully_inside & (np.abs(centers) > math.sqrt(h)) & ~origin_bin

    idx = np.nonzero(admissible)[0]
    # per-bin stderr from the spread of per-shard means (shards are iid blocks)
    shard_n = np.diff(np.minimum(np.arange(n_shards + 1) * SHARD_SIZE, budget))
    per_shard = bin_counts[:, idx] / shard_n[:, None]
    dev = per_shard - counts[idx] / budget
    gh_stderr = (h * h / area) * np.sqrt(
        (dev * dev).sum(axis=0) / (n_shards * max(n_shards - 1, 1)))
    gh = h * h * counts[idx] / (budget * area)
    gd8 = np.empty(len(idx))
    for k, b in enumerate(idx):
        gd8[k] = 8.0 * dom.greens_gd(complex(centers[b]))
    diff = gh - gd8

    collar = []
    for c, (lo, hi) in enumerate(collar_bands):
        r_hi, r_lo = 1.0 - lo * h, 1.0 - hi * h
        band_area = math.pi * (r_hi**2 - r_lo**2)
        cnt = int(collar_counts[:, c].sum())
        ghc = h * h * cnt / (budget * band_area)
        per = collar_counts[:, c] / shard_n
        devc = per - cnt / budget
        ghc_err = (h * h / band_area) * math.sqrt(
            float((devc * devc).sum()) / n_shards / max(n_shards - 1, 1))
        # prediction: band-average of 8(G_D(r) + H_D h v(l/h)), H_D = 1/2pi
        ls = np.linspace(lo * h, hi * h, 33)
        rmid = 1.0 - ls
        vcfg = WalkConfig(h=1.0, seed=derive_seed(seed, _TAG_COLLAR, c),
                          samples=collar_samples, max_steps=HALFPLANE_MAX_STEPS)
        v_mid = exit_functional(0.5 * (lo + hi), vcfg).mean
        gdvals = -np.log(rmid) / (2.0 * math.pi)
        pred_profile = 8.0 * (gdvals + (1.0 / (2 * math.pi)) * h * v_mid)
        weights = rmid  # area element ~ r dr
        pred = float((pred_profile * weights).sum() / weights.sum())
        collar.append(CollarBand(lo, hi, float(ghc), float(ghc_err), pred, cnt))

    return GreensGrid(
        h=h, centers=centers[idx], area=area, gh_scaled=gh, gh_stderr=gh_stderr,
        gd8=gd8, diff=diff, visits=counts[idx],
        sup_diff=float(np.abs(diff).max()) if len(idx) else math.nan,
        mean_steps=mean_steps, mass_ratio=mass_ratio,
        low_visit_bins=int((counts[idx] < 100).sum()), collar=collar,
        censored=censored, geometry_errors=geom)


# ---------------------------------------------------------------------------
# boundary-layer Laplacian (disk-average generator near the boundary)
# ---------------------------------------------------------------------------

def _f_re_z2(z):
    z = np.asarray(z)
    return np.real(z) ** 2 - np.imag(z) ** 2


def _grad_re_z2(z):
    z = np.asarray(z)
    return 2.0 * np.real(z) - 2j * np.imag(z)


def _f_re(z):
    return np.real(np.asarray(z))


def _grad_re(z):
    return np.ones_like(np.asarray(z, dtype=complex)) * (1.0 + 0j)


#: harmonic test functions with closed-form gradients (as complex fx + i fy)
HARMONIC_FNS: dict[str, tuple[Callable, Callable]] = {
    "re_z2": (_f_re_z2, _grad_re_z2),
    "re": (_f_re, _grad_re),
}


def blayer_formula(dom: AnalyticDomain, grad: Callable, t_angle: float,
                   l: float, h: float) -> float:
    """Closed-form boundary-layer value of the disk-average generator.

    (1/pi h^2) (df/dn)(x) [ (2/3) h^2 sqrt(h^2-l^2) + (l^2/3) sqrt(h^2-l^2)
                            - l h^2 arccos(l/h) ].
    """
    x = complex(dom.boundary_point(t_angle))
    _, _, normal, _ = dom.project_to_boundary(x + 0j)
    gr = complex(grad(x))
    dfdn = gr.real * normal.real + gr.imag * normal.imag
    s = math.sqrt(max(h * h - l * l, 0.0))
    bracket = (2.0 / 3.0) * h * h * s + (l * l / 3.0) * s - l * h * h * math.acos(
        min(max(l / h, -1.0), 1.0))
    return dfdn * bracket / (math.pi * h * h)


def _crossing_radius(dom: AnalyticDomain, z0: complex, alpha: float, h: float):
    """Radius in (0, h) where z0 + rho e^{i alpha} crosses the boundary."""

    def s(rho):
        return abs(dom.invert(z0 + rho * complex(math.cos(alpha), math.sin(alpha)))) - 1.0

    lo, hi = 0.0, h
    if s(hi) <= 0:
        return None
    if s(lo) >= 0:
        return 0.0
    return brentq(s, lo, hi, xtol=1e-14)


def blayer_numeric(dom: AnalyticDomain, f: Callable, t_angle: float, l: float,
                   h: float, n_ang: int = 96, n_rad: int = 48) -> float:
    """Quadrature value of the generator at x + l n_x with the nearest-point
    extension f(P) = f(Pbar) outside the domain."""
    x = complex(dom.boundary_point(t_angle))
    _, _, normal, _ = dom.project_to_boundary(x + 0j)
    z0 = x + l * normal
    f0 = float(f(z0))

    xg, wg = np.polynomial.legendre.leggauss(n_rad)

    def f_ext(pts):
        pts = np.asarray(pts)
        vals = np.empty(pts.shape, dtype=float)
        for i, p in enumerate(pts.ravel()):
            if dom.inside(complex(p)):
                vals.ravel()[i] = float(f(complex(p)))
            else:
                proj, _, _, _ = dom.project_to_boundary(complex(p))
                vals.ravel()[i] = float(f(proj))
        return vals

    def radial_integral(alpha: float) -> float:
        rho_c = _crossing_radius(dom, z0, alpha, h)
        total = 0.0
        segments = [(0.0, h, True)] if rho_c is None else \
            [(0.0, rho_c, True), (rho_c, h, False)]
        e_alpha = complex(math.cos(alpha), math.sin(alpha))
        for lo, hi, inside_seg in segments:
            if hi - lo < 1e-15:
                continue
            mid, halfw = 0.5 * (hi + lo), 0.5 * (hi - lo)
            rr = mid + halfw * xg
            pts = z0 + rr * e_alpha
            if inside_seg:
                vals = np.asarray(f(pts), dtype=float)
            else:
                vals = f_ext(pts)
            total += float(np.dot(wg * halfw, (vals - f0) * rr))
        return total

    # angular splits where the rim of B(z0, h) crosses the boundary
    probe = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    rim_inside = np.array([dom.inside(z0 + h * complex(math.cos(a), math.sin(a)))
                           for a in probe])
    splits = [0.0, 2.0 * math.pi]
    for i in range(len(probe)):
        a, b = probe[i], probe[(i + 1) % len(probe)]
        if rim_inside[i] != rim_inside[(i + 1) % len(probe)]:
            if b < a:
                b += 2.0 * math.pi
            f_edge = lambda t: 1.0 if dom.inside(
                z0 + h * complex(math.cos(t), math.sin(t))) else -1.0
            lo, hi = a, b
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if f_edge(mid) == f_edge(a):
                    lo = mid
                else:
                    hi = mid
            splits.append(0.5 * (lo + hi) % (2.0 * math.pi))
    splits = sorted(set(splits))

    xga, wga = np.polynomial.legendre.leggauss(n_ang)
    total = 0.0
    for lo, hi in zip(splits[:-1], splits[1:]):
        if hi - lo < 1e-14:
            continue
        mid, halfw = 0.5 * (hi + lo), 0.5 * (hi - lo)
        for xa, wa in zip(xga, wga):
            total += wa * halfw * radial_integral(mid + halfw * xa)
    return total / (math.pi * h * h)


@dataclass
class BlayerPoint:
    h: float
    l: float
    numeric: float
    formula: float

    @property
    def diff(self) -> float:
        return self.numeric - self.formula


def boundary_layer_laplacian(dom: AnalyticDomain, fn_name: str, t_angle: float,
                             l_frac: float, h: float) -> BlayerPoint:
    """Numeric vs closed-form generator value at depth l = l_frac * h."""
    if fn_name not in HARMONIC_FNS:
        raise ValueError(f"unknown harmonic test function {fn_name!r}; "
                         f"choices: {sorted(HARMONIC_FNS)}")
    f, grad = HARMONIC_FNS[fn_name]
    if not 0.0 <= l_frac <= 1.0:
        raise ValueError("l/h must lie in [0, 1]")
    l = l_frac * h
    num = blayer_numeric(dom, f, t_angle, l, h)
    form = blayer_formula(dom, grad, t_angle, l, h)
    return BlayerPoint(h, l, num, form)
