"""Analytic Jordan domains given as polynomial images of the unit disk.

A domain is F(unit disk) for F(w) = c1 w + c2 w^2 + ... + cm w^m with
c1 != 0, F(0) = 0 and F injective on a neighbourhood of the closed disk
(certified numerically at construction).  The power-series form gives
closed-form derivatives for the boundary modulus m(t) = 1/|F'(e^it)| and
makes Newton inversion cheap, which is all the walk engine and the density
formulas need.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

_CACHE_N = 4096   # boundary polyline resolution
_LUT_N = 2048     # image-angle sectors for kernel Newton seeds
_GRID_N = 512     # classification grid resolution
_JUMP_WINDOW = 0.7  # angular window (radians) of the windowed distance bound


class GeometryError(RuntimeError):
    """Raised when Newton inversion or projection fails to converge."""


def _poly_val(coeffs: np.ndarray, w):
    """F(w) for coeffs = (c1..cm); works on scalars and arrays."""
    acc = np.full_like(np.asarray(w, dtype=complex), coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * w + c
    return acc * w


def _poly_der(coeffs: np.ndarray, w, order: int = 1):
    """Derivative of F of the given order."""
    m = len(coeffs)
    powers = np.arange(1, m + 1)
    dc = coeffs.copy()
    dp = powers.copy()
    for _ in range(order):
        dc = dc * dp
        dp = dp - 1
    keep = dp >= 0
    dc, dp = dc[keep], dp[keep]
    w = np.asarray(w, dtype=complex)
    acc = np.zeros_like(w)
    for c, p in zip(dc, dp):
        acc = acc + c * w ** p
    return acc


@dataclass
class AnalyticDomain:
    """Immutable simply connected domain F(unit disk), F polynomial."""

    coeffs: np.ndarray
    name: str = ""
    # derived geometry, filled in __post_init__
    boundary_t: np.ndarray = field(init=False, repr=False)
    boundary_z: np.ndarray = field(init=False, repr=False)
    r_in: float = field(init=False)
    r_out: float = field(init=False)
    reach_estimate: float = field(init=False)
    diam: float = field(init=False)
    lut_t: np.ndarray = field(init=False, repr=False)
    lut_br: np.ndarray = field(init=False, repr=False)
    class_grid: np.ndarray = field(init=False, repr=False)
    grid_gs: float = field(init=False)
    grid_gn: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if c[0] == 0:
            raise ValueError("c1 must be nonzero")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("coefficients must be finite")
        self.coeffs = c

        t = np.linspace(0.0, 2.0 * np.pi, _CACHE_N, endpoint=False)
        ew = np.exp(1j * t)
        z = _poly_val(c, ew)
        zp = _poly_der(c, ew, 1) * 1j * ew          # dC/dt
        zpp = (-_poly_der(c, ew, 1) * ew
               - _poly_der(c, ew, 2) * ew * ew)     # d2C/dt2
        self.boundary_t = t
        self.boundary_z = z

        radii = np.abs(z)
        self.r_in = float(radii.min())
        self.r_out = float(radii.max())
        self.diam = float(2.0 * self.r_out)
        if self.r_in <= 0:
            raise ValueError("boundary passes through the origin; 0 must be interior")

        self._certify_injective(ew, z)

        # reach: min radius of curvature over the boundary grid, / 4
        speed = np.abs(zp)
        curv = np.abs(np.imag(np.conj(zp) * zpp)) / speed**3
        with np.errstate(divide="ignore"):
            rad_curv = np.where(curv > 0, 1.0 / curv, np.inf)
        self.reach_estimate = float(min(rad_curv.min() / 4.0, self.r_in))

        self._build_lut(t, z)
        self._build_class_grid()

    # -- construction helpers ------------------------------------------------

    def _certify_injective(self, ew, z):
        # F' must not vanish on |w| <= 1 + margin (roots of a polynomial)
        m = len(self.coeffs)
        dcoef = (self.coeffs * np.arange(1, m + 1))[::-1]  # descending for roots()
        if m > 1:
            roots = np.roots(dcoef)
            if len(roots) and np.abs(roots).min() <= 1.02:
                raise ValueError("F' vanishes on or too near the closed unit disk")
        # pairwise secant ratio on the boundary grid must stay positive
        idx = np.arange(0, _CACHE_N, 8)
        zz = z[idx]
        ww = ew[idx]
        dz = np.abs(zz[:, None] - zz[None, :])
        dw = np.abs(ww[:, None] - ww[None, :])
        off = dw > 1e-12
        ratio = dz[off] / dw[off]
        if ratio.min() <= 1e-9:
            raise ValueError("boundary self-intersects: map is not injective")

    def _build_lut(self, t, z):
        """Image-angle sector -> boundary parameter and boundary radius.

        Requires arg F(e^it) to be monotone in t (true for the built-in,
        mildly perturbed disks); otherwise the seeds would be ambiguous.
        """
        phi = np.unwrap(np.angle(z))
        if np.any(np.diff(phi) <= 0) or not (5.9 < phi[-1] - phi[0] < 2 * np.pi + 0.4):
            raise ValueError("image angle is not monotone along the boundary; "
                             "domain too distorted for the angular seed table")
        centers = -np.pi + (np.arange(_LUT_N) + 0.5) * (2 * np.pi / _LUT_N)
        phi0 = phi[0]
        # map sector centers into [phi0, phi0 + 2pi), then interpolate t(phi)
        c = phi0 + np.mod(centers - phi0, 2 * np.pi)
        phi_ext = np.concatenate([phi, [phi[0] + 2 * np.pi]])
        t_ext = np.concatenate([t, [2 * np.pi]])
        tt = np.interp(c, phi_ext, t_ext)
        self.lut_t = tt
        self.lut_br = np.abs(_poly_val(self.coeffs, np.exp(1j * tt)))

    def _build_class_grid(self):
        """Float32 cell classification for the walk kernel.

        Positive entries are certified lower bounds on dist(cell, boundary):
        min of (window-min boundary radius - max cell radius) over a +-0.7 rad
        window and the chord bound 2 sqrt(r_in rho) sin(0.35) to the rest of
        the curve (exact for a boundary that is a graph over the image angle,
        which _build_lut already certified).  -1 marks cells needing Newton,
        -2 cells certainly outside.
        """
        from scipy.ndimage import maximum_filter1d, minimum_filter1d

        if self.is_identity:
            self.class_grid = np.zeros(1, dtype=np.float32)
            self.grid_gs = self.r_out + 0.05
            self.grid_gn = 1
            return

        m = 8192
        phi = np.unwrap(np.angle(self.boundary_z))
        rad = np.abs(self.boundary_z)
        phi0 = phi[0]
        phi_ext = np.concatenate([phi, [phi0 + 2 * np.pi]])
        rad_ext = np.concatenate([rad, [rad[0]]])
        dphi = 2 * np.pi / m
        phi_u = phi0 + np.arange(m) * dphi
        rad_u = np.interp(phi_u, phi_ext, rad_ext)
        sag = float(np.abs(np.diff(np.concatenate([rad_u, rad_u[:1]]))).max()) * 2.0

        span_allow = 0.05  # covers the angular extent of any cell with rho >= 0.08
        big = 2 * int(np.ceil((_JUMP_WINDOW + span_allow) / dphi)) + 1
        small = 2 * int(np.ceil(span_allow / dphi)) + 1
        r_big_min = minimum_filter1d(rad_u, big, mode="wrap") - sag
        r_sml_min = minimum_filter1d(rad_u, small, mode="wrap") - sag
        r_sml_max = maximum_filter1d(rad_u, small, mode="wrap") + sag
        c_far = 2.0 * math.sqrt(max(self.r_in - sag, 0.0)) * math.sin(_JUMP_WINDOW / 2.0)

        gn = _GRID_N
        gs = self.r_out + 0.05
        cw = 2.0 * gs / gn
        edges = -gs + np.arange(gn + 1) * cw
        cx = 0.5 * (edges[:-1] + edges[1:])
        gx, gy = np.meshgrid(cx, cx)  # gy rows = y, matching iy*gn+ix layout
        half = 0.5 * cw
        corner_r = np.stack([np.hypot(gx + sx * half, gy + sy * half)
                             for sx in (-1, 1) for sy in (-1, 1)])
        rho_max = corner_r.max(axis=0)
        # exact min distance from the origin to each cell rectangle
        rho_min = np.hypot(np.maximum(np.abs(gx) - half, 0.0),
                           np.maximum(np.abs(gy) - half, 0.0))

        theta = np.arctan2(gy, gx)
        idx = np.mod(theta - phi0, 2 * np.pi) / dphi
        idx = np.clip(idx.astype(np.int64), 0, m - 1)

        deep = rho_max < 0.08
        inside_sure = deep | (rho_max < r_sml_min[idx])
        outside_sure = (~deep) & (rho_min > r_sml_max[idx])
        delta = np.minimum(r_big_min[idx] - rho_max, c_far * np.sqrt(rho_min))
        delta = np.where(deep, self.r_in - sag - rho_max, delta)
        grid = np.where(inside_sure, np.maximum(delta, 1e-9),
                        np.where(outside_sure, -2.0, -1.0))
        self.class_grid = grid.astype(np.float32).ravel()
        self.grid_gs = gs
        self.grid_gn = gn

    # -- basic map evaluations -----------------------------------------------

    @property
    def is_identity(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 1.0 + 0.0j

    def map(self, w):
        """F(w)."""
        return _poly_val(self.coeffs, w)

    def map_dw(self, w, order: int = 1):
        return _poly_der(self.coeffs, w, order)

    def boundary_point(self, t):
        return _poly_val(self.coeffs, np.exp(1j * np.asarray(t, dtype=float)))

    # -- inversion and inside test --------------------------------------------

    def _seed(self, z: complex) -> complex:
        i = int(np.argmin(np.abs(self.boundary_z - z)))
        w0 = np.exp(1j * self.boundary_t[i])
        zb = self.boundary_z[i]
        if abs(zb) > 0:
            w0 = w0 * min(abs(z) / abs(zb), 1.0)
        return w0

    def invert(self, z: complex, tol: float | None = None, itmax: int = 60) -> complex:
        """w = F^{-1}(z) by Newton; z must lie in (a neighbourhood of) the closure."""
        if tol is None:
            tol = 1e-12 * self.diam
        w = self._seed(z) if abs(z) > 0.25 * self.r_in else complex(z) / self.coeffs[0]
        for _ in range(itmax):
            f = complex(_poly_val(self.coeffs, w)) - z
            if abs(f) <= tol:
                return w
            w -= f / complex(_poly_der(self.coeffs, w, 1))
        f = complex(_poly_val(self.coeffs, w)) - z
        if abs(f) <= tol:
            return w
        raise GeometryError(f"Newton inversion failed at z={z!r} (residual {abs(f):.3g})")

    def _winding(self, z: complex) -> tuple[int, float]:
        """Winding number of the cached polyline and distance to it."""
        d = self.boundary_z - z
        ang = np.angle(d)
        turns = np.diff(np.concatenate([ang, ang[:1]]))
        turns = np.mod(turns + np.pi, 2 * np.pi) - np.pi
        w = turns.sum() / (2 * np.pi)
        return int(round(w)), float(np.abs(d).min())

    def inside(self, z: complex) -> bool:
        """Layered membership test, exact for the represented domain."""
        az = abs(z)
        if az < self.r_in:           # (a) inscribed disk
            return True
        if az > self.r_out:          # (b) bounding circle
            return False
        wind, dist = self._winding(z)
        margin = 4.0 * np.pi * self.r_out / _CACHE_N
        if dist > margin:            # (c) winding number, conservative margin
            return wind != 0
        w = self.invert(z)           # (d) Newton in the residual band
        return bool(abs(w) < 1.0)

    # -- boundary projection ---------------------------------------------------

    def project_to_boundary(self, z: complex):
        """Nearest boundary point: (point, signed distance l, inward normal, t).

        l > 0 for z inside the domain.  Requires dist(z, boundary) below the
        reach estimate.
        """
        i = int(np.argmin(np.abs(self.boundary_z - z)))
        if abs(self.boundary_z[i] - z) > self.reach_estimate * 1.5 + 4 * np.pi * self.r_out / _CACHE_N:
            raise GeometryError(f"point {z!r} is beyond the projection reach")
        t = float(self.boundary_t[i])
        c = self.coeffs
        for _ in range(60):
            ew = cmath.exp(1j * t)
            f = complex(_poly_val(c, ew)) - z
            fp = complex(_poly_der(c, ew, 1))
            fpp = complex(_poly_der(c, ew, 2))
            c1 = 1j * ew * fp
            c2 = -ew * fp - ew * ew * fpp
            g = f.real * c1.real + f.imag * c1.imag
            gp = abs(c1) ** 2 + f.real * c2.real + f.imag * c2.imag
            dt = g / gp
            t -= dt
            if abs(dt) < 1e-15:
                break
        ew = cmath.exp(1j * t)
        p = complex(_poly_val(c, ew))
        tangent = 1j * ew * complex(_poly_der(c, ew, 1))
        tangent /= abs(tangent)
        residual = abs((z - p).real * tangent.real + (z - p).imag * tangent.imag)
        if residual > 1e-10 * self.diam:
            raise GeometryError(f"projection tangency residual {residual:.3g} too large")
        normal = 1j * tangent  # inward for the counterclockwise parametrization
        l = (z - p).real * normal.real + (z - p).imag * normal.imag
        t = t % (2 * np.pi)
        return p, float(l), normal, t

    # -- boundary modulus and Green's function --------------------------------

    def boundary_m(self, t):
        """m(t) = 1/|F'(e^it)| with analytic first and second derivatives."""
        t = np.asarray(t, dtype=float)
        ew = np.exp(1j * t)
        a = _poly_der(self.coeffs, ew, 1)                    # A(t) = F'(e^it)
        a1 = _poly_der(self.coeffs, ew, 2) * 1j * ew         # dA/dt
        a2 = (-_poly_der(self.coeffs, ew, 2) * ew
              - _poly_der(self.coeffs, ew, 3) * ew * ew)     # d2A/dt2
        aa = np.abs(a)
        re1 = np.real(np.conj(a) * a1)
        m = 1.0 / aa
        m1 = -re1 / aa**3
        m2 = 3.0 * re1**2 / aa**5 - (np.abs(a1) ** 2 + np.real(np.conj(a) * a2)) / aa**3
        if m.ndim == 0:
            return float(m), float(m1), float(m2)
        return m, m1, m2

    def greens_gd(self, z: complex) -> float:
        """Continuous Green's function G_D(0, z) = -ln|F^{-1}(z)| / 2 pi."""
        if z == 0:
            raise ValueError("Green's function pole at z = 0")
        w = self.invert(z)
        return -math.log(abs(w)) / (2.0 * math.pi)

    def poisson_hd(self, t) -> float | np.ndarray:
        """Poisson kernel H_D(0, .) at the boundary point of parameter t."""
        m, _, _ = self.boundary_m(t)
        return m / (2.0 * math.pi)

    # -- recentering -----------------------------------------------------------

    def recenter(self, z0: complex, degree: int = 64) -> "AnalyticDomain":
        """Domain seen from interior point z0: truncated series of F o Mobius.

        The Mobius factor (w + a)/(1 + conj(a) w) with a = F^{-1}(z0) maps 0
        to z0; the composition is re-expanded to `degree` terms and shifted
        so the new map sends 0 to 0 (i.e. the result represents D - z0).
        """
        a = self.invert(complex(z0))
        if abs(a) >= 0.95:
            raise ValueError("recentering point too close to the boundary")
        n = max(degree, 16)
        k = np.arange(1, n + 1)
        # series of the Mobius map about 0: (w+a)/(1+conj(a)w)
        #   = a + (1-|a|^2) * sum_{j>=1} (-conj(a))^{j-1} w^j
        mob = np.zeros(n + 1, dtype=complex)
        mob[0] = a
        mob[1:] = (1 - abs(a) ** 2) * (-np.conj(a)) ** (k - 1)
        # compose F with the Mobius series (power-series composition)
        comp = np.zeros(n + 1, dtype=complex)
        pw = np.zeros(n + 1, dtype=complex)
        pw[0] = 1.0
        for j, cj in enumerate(self.coeffs, start=1):
            # pw = mob^j, truncated
            pw = np.convolve(pw, mob)[: n + 1]
            comp += cj * pw
        comp[0] -= complex(z0)  # translate so the new origin is the map of 0
        if abs(comp[0]) > 1e-10 * self.diam:
            raise GeometryError("recentered series lost the origin")
        tail = np.abs(comp[1:])
        keep = max(np.nonzero(tail > 1e-13 * self.diam)[0].max() + 1, 1)
        return AnalyticDomain(comp[1 : keep + 1], name=f"{self.name or 'domain'}@{z0}")


# -- registry and parsing ------------------------------------------------------

BUILTIN_DOMAINS = {
    "disk": [1.0],
    "disk2": [2.0],
    "cardioid": [1.0, 0.2],
    "asym3": [1.0, 0.15, 0.1j],
}


def parse_complex(tok: str) -> complex:
    """Parse 're', 're+imi' or 're-imi' (also accepts 'j' for the unit)."""
    s = tok.strip().replace(" ", "").replace("i", "j")
    if not s:
        raise ValueError("empty coefficient")
    try:
        return complex(s)
    except ValueError as e:
        raise ValueError(f"cannot parse complex coefficient {tok!r}") from e


def make_domain(spec: str) -> AnalyticDomain:
    """Build a domain from a registry name or 'c1,c2,...' coefficients."""
    s = spec.strip()
    if s in BUILTIN_DOMAINS:
        return AnalyticDomain(np.asarray(BUILTIN_DOMAINS[s], dtype=complex), name=s)
    coeffs = [parse_complex(t) for t in s.split(",") if t.strip()]
    if not coeffs:
        raise ValueError(f"no coefficients in domain spec {spec!r}")
    return AnalyticDomain(np.asarray(coeffs, dtype=complex), name=s)
