"""Characteristic function, two-step density and potential kernel of the walk.

Everything here is for the unit step radius (h = 1); a(x/h) covers other
scales.  The potential kernel is evaluated from its closed radial form

    a(x) = [p1(0) - p1(x)] + [p2(0) - p2(x)]
           + (1/2pi) Int_0^inf (1 - J0(r|x|)) phi(r)^3 r / (1 - phi(r)) dr,

where phi(r) = 2 J1(r)/r and pk are the k-step transition densities.  The
integrand decays like r^(-7/2) with two oscillation scales (3 and |x|),
so it is integrated by composite Gauss-Legendre panels short enough for
both frequencies, truncated where the envelope bound drops below 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev
from scipy.special import j0, j1

FOUR_OVER_PI = 4.0 / math.pi

# phi(r) = 1 - r^2/8 + r^4/192 on [0, 0.1]: the quartic truncation is kept
# exact there (remainder r^6/9216 <= 1.1e-10); the full series takes over
# beyond, scipy's j1 above r = 1.
_TAYLOR_SWITCH = 0.1

# series coefficients of 2 J1(r)/r = sum_k c_k r^(2k)
_SERIES_K = np.arange(0, 16)
_SERIES_C = np.array([(-0.25) ** k / (math.factorial(k) * math.factorial(k + 1))
                      for k in _SERIES_K])


def charfn(r):
    """Characteristic function phi(r) of the unit disk step at radius r >= 0."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < 0):
        raise ValueError("radial frequency must be >= 0")
    out = np.empty_like(r)
    lo = r <= _TAYLOR_SWITCH
    mid = (~lo) & (r < 1.0)
    hi = r >= 1.0
    r2 = r[lo] ** 2
    out[lo] = 1.0 - r2 / 8.0 + r2 * r2 / 192.0
    if mid.any():
        out[mid] = np.polynomial.polynomial.polyval(r[mid] ** 2, _SERIES_C)
    if hi.any():
        out[hi] = 2.0 * j1(r[hi]) / r[hi]
    return float(out[0]) if scalar else out


def one_minus_charfn(r):
    """1 - phi(r), computed without cancellation for small r."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.empty_like(r)
    lo = r <= _TAYLOR_SWITCH
    mid = (~lo) & (r < 1.0)
    hi = r >= 1.0
    r2 = r[lo] ** 2
    out[lo] = r2 / 8.0 - r2 * r2 / 192.0
    if mid.any():
        out[mid] = -np.polynomial.polynomial.polyval(r[mid] ** 2,
                                                     np.concatenate([[0.0], _SERIES_C[1:]]))
    if hi.any():
        out[hi] = 1.0 - 2.0 * j1(r[hi]) / r[hi]
    return float(out[0]) if scalar else out


def psi_fn(r):
    """psi(r) = 1/(1 - phi(r)) - 8/r^2, which tends to 1/3 at 0."""
    r = np.asarray(r, dtype=float)
    return 1.0 / one_minus_charfn(r) - 8.0 / r**2


@dataclass(frozen=True)
class CharFnSample:
    r: float
    phi: float

    def __post_init__(self):
        if self.r < 0 or abs(self.phi) > 1.0 + 1e-12:
            raise ValueError("invalid characteristic function sample")


def charfn_sample(r: float) -> CharFnSample:
    return CharFnSample(float(r), float(charfn(r)))


# ---------------------------------------------------------------------------
# transition densities
# ---------------------------------------------------------------------------


def p1(x) -> float:
    """One-step density p(1,0,x) = (1/pi) 1_{|x|<1}."""
    return (1.0 / math.pi) if abs(complex(x)) < 1.0 else 0.0


def p2(x) -> float:
    """Two-step density p(2,0,x): lens area of two unit disks / pi^2."""
    d = abs(complex(x))
    if d >= 2.0:
        return 0.0
    half = 0.5 * d
    return (2.0 * math.acos(half) - half * math.sqrt(4.0 - d * d)) / math.pi**2


def _p2_radial(d: np.ndarray) -> np.ndarray:
    out = np.zeros_like(d)
    m = d < 2.0
    half = 0.5 * d[m]
    out[m] = (2.0 * np.arccos(half) - half * np.sqrt(4.0 - d[m] ** 2)) / math.pi**2
    return out


# ---------------------------------------------------------------------------
# potential kernel
# ---------------------------------------------------------------------------

R_MAX_DEFAULT = 2600.0  # envelope tail bound ~3.5 R^{-5/2} <= 1e-8


class QuadratureError(RuntimeError):
    """Oscillatory radial quadrature failed its internal Cauchy check."""


def _tail_weight(r: np.ndarray) -> np.ndarray:
    """phi(r)^3 r / (1 - phi(r)), stable at small r."""
    ph = charfn(r)
    return ph**3 * r / one_minus_charfn(r)


def _a_radial_raw(b: float, r_max: float, per_period: float) -> float:
    # panels short enough for the fastest oscillation scale (freq b + 3)
    panel = per_period * 2.0 * math.pi / (b + 3.0)
    n_panels = max(int(math.ceil(r_max / panel)), 8)
    edges = np.linspace(0.0, r_max, n_panels + 1)
    xg, wg = np.polynomial.legendre.leggauss(16)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    vals = (1.0 - j0(nodes * b)) * _tail_weight(nodes)
    return float(np.dot(weights, vals)) / (2.0 * math.pi)


@lru_cache(maxsize=16384)
def _a_radial(b: float, r_max: float) -> float:
    """The Fourier tail integral (1/2pi) Int (1 - J0(rb)) w(r) dr.

    Every value carries a built-in Cauchy check: a denser, longer rule must
    agree to 2e-8 or the evaluation is rejected.
    """
    if b == 0.0:
        return 0.0
    val = _a_radial_raw(b, r_max, per_period=3.0)
    ref = _a_radial_raw(b, r_max + 500.0, per_period=2.0)
    if abs(val - ref) > 5e-8:
        raise QuadratureError(
            f"radial quadrature not converged at |x|={b} "
            f"(panel/truncation disagreement {abs(val - ref):.2e})")
    return val


def potential_a(x, r_max: float = R_MAX_DEFAULT) -> float:
    """Potential kernel a(x) (unit step radius); a depends on |x| only."""
    d = abs(complex(x))
    one_over_pi = 1.0 / math.pi
    term1 = one_over_pi - (one_over_pi if d < 1.0 else 0.0)
    term2 = one_over_pi - p2(d)
    return term1 + term2 + _a_radial(float(d), float(r_max))


def potential_a_radial(d: float, r_max: float = R_MAX_DEFAULT) -> float:
    return potential_a(complex(d, 0.0), r_max)


# ---------------------------------------------------------------------------
# asymptotic constant fit
# ---------------------------------------------------------------------------


@dataclass
class PotentialProfile:
    radii: np.ndarray
    a_values: np.ndarray
    residuals: np.ndarray          # a(x) - (4/pi) ln|x|
    c0_hat: float
    c0_ci: float
    decay_coeff: float             # fitted coefficient of |x|^-2
    fit_residuals: np.ndarray


def fit_c0(radii, r_max: float = R_MAX_DEFAULT) -> PotentialProfile:
    """Least squares of a(x) - (4/pi) ln|x| against C0 + c |x|^-2."""
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 6:
        raise ValueError("need at least 6 radii")
    if radii.max() < 4.0 * radii.min():
        raise ValueError("radii must span at least a factor of 4")
    a_vals = np.array([potential_a_radial(r, r_max) for r in radii])
    resid = a_vals - FOUR_OVER_PI * np.log(radii)
    design = np.column_stack([np.ones_like(radii), radii**-2.0])
    coef, _, rank, _ = np.linalg.lstsq(design, resid, rcond=None)
    if rank < 2:
        raise ValueError("radii too clustered for the two-parameter fit")
    fit_res = resid - design @ coef
    dof = max(len(radii) - 2, 1)
    s2 = float(fit_res @ fit_res) / dof
    cov00 = s2 * np.linalg.inv(design.T @ design)[0, 0]
    return PotentialProfile(radii, a_vals, resid, float(coef[0]),
                            float(math.sqrt(max(cov00, 0.0))), float(coef[1]), fit_res)


# ---------------------------------------------------------------------------
# discrete Laplacian identity
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _radial_interp(rho_max: float, r_max: float):
    """Chebyshev interpolants of a(rho) on the smooth pieces of [0, rho_max]."""
    pieces = []
    cuts = [c for c in (1.0, 2.0) if c < rho_max] + [rho_max]
    lo = 0.0
    for hic in cuts:
        # open left endpoint at the jump rho = 1
        nodes_n = 200
        k = np.arange(nodes_n)
        xc = np.cos(math.pi * (k + 0.5) / nodes_n)  # Chebyshev points in (-1, 1)
        rr = 0.5 * (lo + hic) + 0.5 * (hic - lo) * xc
        vals = np.array([potential_a_radial(r, r_max) for r in rr])
        coefs = chebyshev.chebfit(xc, vals, nodes_n - 1)
        pieces.append((lo, hic, coefs))
        lo = hic
    return tuple(pieces)


def _a_interp(rho: np.ndarray, pieces) -> np.ndarray:
    out = np.empty_like(rho)
    for lo, hi, coefs in pieces:
        m = (rho >= lo) & (rho <= hi) if hi == pieces[-1][1] else (rho >= lo) & (rho < hi)
        if m.any():
            xc = (2.0 * rho[m] - (lo + hi)) / (hi - lo)
            out[m] = chebyshev.chebval(xc, coefs)
    return out


def check_delta_identity(x, r_max: float = R_MAX_DEFAULT) -> float:
    """Deviation of the unit-disk average Laplacian of a from (1/pi) 1_{|x|<1}.

    Keeps off the indicator circle: require ||x| - 1| > 0.05.
    """
    d = abs(complex(x))
    if abs(d - 1.0) <= 0.05:
        raise ValueError("evaluation point too close to the indicator discontinuity")
    rho_hi = d + 1.0
    pieces = _radial_interp(float(rho_hi), float(r_max))

    xg, wg = np.polynomial.legendre.leggauss(160)

    def piece_integral(lo, hi, weight_fn):
        if hi <= lo:
            return 0.0
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        rr = mid + half * xg
        return float(np.dot(wg * half, _a_interp(rr, pieces) * weight_fn(rr) * rr))

    total = 0.0
    if d < 1.0:
        # full circles rho < 1 - d
        cuts = sorted({0.0, 1.0 - d})
        total += piece_integral(0.0, 1.0 - d, lambda r: 2.0 * math.pi * np.ones_like(r))
        lo_arc = 1.0 - d
    else:
        lo_arc = d - 1.0

    def arc(r):
        c = (r**2 + d**2 - 1.0) / (2.0 * r * d)
        c = np.clip(c, -1.0, 1.0)
        return 2.0 * np.arccos(c)

    cuts = sorted({lo_arc, rho_hi} | {c for c in (1.0, 2.0) if lo_arc < c < rho_hi})
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += piece_integral(lo, hi, arc)

    avg_minus_a = total / math.pi - potential_a_radial(d, r_max)
    target = (1.0 / math.pi) if d < 1.0 else 0.0
    return avg_minus_a - target
