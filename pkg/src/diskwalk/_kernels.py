"""Numba kernels for the walk engines.

Trajectories are partitioned into fixed-size shards (tasks); every
trajectory draws from its own counter-based stream keyed by
(seed, task id, trajectory id), so results are bit-identical for any
worker count.  Per-shard outputs are written to disjoint slots and reduced
in shard order by the callers.

Far-field acceleration: while the walk is provably more than a safety
margin away from the boundary, a block of k steps is replaced by a single
rotationally symmetric displacement with the exact second moment of the
k-step sum.  Exit-functional and harmonic-measure targets are
walk-harmonic wherever no exit can occur, so any such block with a
no-exit guarantee leaves their expectations unchanged; the block size is
chosen so the true k-step path stays inside with margin >= 6 sigma.
Exits therefore only ever happen on exact single steps.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .rng import u01, stream_key

U1 = np.uint64(1)
TWO_PI = 6.283185307179586
PI = 3.141592653589793

STATUS_OK = 0
STATUS_CENSORED = 1
STATUS_GEOMETRY = 2

# 1-d half-plane walk: exact steps below this height, block jumps above.
BAND_TOP = 10.0
# 2-d walks: minimum block size worth jumping; blocks of any size are
# unbiased for walk-harmonic targets (exact second moment + no-exit margin),
# so this is purely an efficiency threshold.
JUMP_MIN_K = 9

# classification grid codes (float32 grid: > 0 means certainly inside with
# that distance bound; negatives are class codes)
GRID_AMBIG = -1.0
GRID_OUTSIDE = -2.0


@njit(cache=True, inline="always")
def _disk_point(key, ctr):
    """Uniform point of the closed unit disk (rejection from the square)."""
    while True:
        a = 2.0 * u01(key, ctr) - 1.0
        ctr += U1
        b = 2.0 * u01(key, ctr) - 1.0
        ctr += U1
        if a * a + b * b <= 1.0:
            return a, b, ctr


@njit(cache=True, inline="always")
def _normal(key, ctr):
    """Standard normal via Box-Muller, clipped to +-6 sigma."""
    u1 = u01(key, ctr)
    ctr += U1
    u2 = u01(key, ctr)
    ctr += U1
    z = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(TWO_PI * u2)
    if z > 6.0:
        z = 6.0
    elif z < -6.0:
        z = -6.0
    return z, ctr


# ---------------------------------------------------------------------------
# half-plane walk (1-d imaginary component, h = 1)
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _halfplane_one(key, y0, max_steps, accelerate):
    """One trajectory; returns (overshoot, steps, exited)."""
    ctr = np.uint64(0)
    y = y0
    n = np.int64(0)
    while n < max_steps:
        if accelerate and y >= BAND_TOP:
            # k-step block; sigma = sqrt(k)/2 = y/6, so a 6-sigma clip
            # cannot reach 0 and the true block crosses 0 with
            # probability ~ 2*Phi(-6) per jump.
            k = np.int64(y * y / 9.0)
            rem = max_steps - n
            if k > rem:
                k = rem
            z, ctr = _normal(key, ctr)
            fk = float(k)
            z -= (z * z * z - 3.0 * z) / (24.0 * fk)  # quartic cumulant adjust
            y += 0.5 * np.sqrt(fk) * z
            if y < 0.5:
                y = 0.5
            n += k
        else:
            a, b, ctr = _disk_point(key, ctr)
            y += b
            n += 1
            if y <= 0.0:
                return -y, n, True
    return 0.0, n, False


@njit(cache=True, parallel=True)
def halfplane_reduce(seed, n_samples, y0, max_steps, accelerate, shard_size, out):
    """Per-shard (n_ok, mean, m2, censored, steps) of the exit overshoot."""
    n_shards = out.shape[0]
    for s in prange(n_shards):
        lo = s * shard_size
        hi = min(lo + shard_size, n_samples)
        n_ok = 0
        mean = 0.0
        m2 = 0.0
        cen = 0
        steps = 0.0
        for j in range(hi - lo):
            key = stream_key(seed, s, j)
            ov, n, exited = _halfplane_one(key, y0, max_steps, accelerate)
            steps += n
            if exited:
                n_ok += 1
                d = ov - mean
                mean += d / n_ok
                m2 += d * (ov - mean)
            else:
                cen += 1
        out[s, 0] = n_ok
        out[s, 1] = mean
        out[s, 2] = m2
        out[s, 3] = cen
        out[s, 4] = steps


@njit(cache=True, parallel=True)
def halfplane_record(seed, n_samples, y0, max_steps, accelerate, shard_size,
                     overshoot, status):
    n_shards = (n_samples + shard_size - 1) // shard_size
    for s in prange(n_shards):
        lo = s * shard_size
        hi = min(lo + shard_size, n_samples)
        for j in range(hi - lo):
            key = stream_key(seed, s, j)
            ov, n, exited = _halfplane_one(key, y0, max_steps, accelerate)
            if exited:
                overshoot[lo + j] = ov
                status[lo + j] = STATUS_OK
            else:
                overshoot[lo + j] = np.nan
                status[lo + j] = STATUS_CENSORED


@njit(cache=True, parallel=True)
def halfplane2d_record(seed, n_samples, y0, max_steps, shard_size, overshoot, status):
    """Full 2-d oracle: polar step sampling, both coordinates simulated."""
    n_shards = (n_samples + shard_size - 1) // shard_size
    for s in prange(n_shards):
        lo = s * shard_size
        hi = min(lo + shard_size, n_samples)
        for j in range(hi - lo):
            key = stream_key(seed, s, j)
            ctr = np.uint64(0)
            x = 0.0
            y = y0
            n = np.int64(0)
            done = False
            while n < max_steps:
                u1 = u01(key, ctr)
                ctr += U1
                u2 = u01(key, ctr)
                ctr += U1
                r = np.sqrt(u1)
                x += r * np.cos(TWO_PI * u2)
                y += r * np.sin(TWO_PI * u2)
                n += 1
                if y <= 0.0:
                    overshoot[lo + j] = -y
                    status[lo + j] = STATUS_OK
                    done = True
                    break
            if not done:
                overshoot[lo + j] = np.nan
                status[lo + j] = STATUS_CENSORED


# ---------------------------------------------------------------------------
# polynomial conformal map helpers
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def poly_f(coeffs, w):
    """F(w) = sum_j coeffs[j-1] w^j."""
    m = coeffs.shape[0]
    acc = coeffs[m - 1]
    for j in range(m - 2, -1, -1):
        acc = acc * w + coeffs[j]
    return acc * w


@njit(cache=True, inline="always")
def poly_fp(coeffs, w):
    """F'(w)."""
    m = coeffs.shape[0]
    acc = coeffs[m - 1] * m
    for j in range(m - 2, -1, -1):
        acc = acc * w + coeffs[j] * (j + 1)
    return acc


@njit(cache=True, inline="always")
def poly_fpp(coeffs, w):
    """F''(w)."""
    m = coeffs.shape[0]
    if m < 2:
        return 0.0j
    acc = coeffs[m - 1] * (m * (m - 1))
    for j in range(m - 2, 0, -1):
        acc = acc * w + coeffs[j] * ((j + 1) * j)
    return acc


@njit(cache=True, inline="always")
def _invert_newton(coeffs, z, w0, tol_sq, itmax):
    w = w0
    for _ in range(itmax):
        f = poly_f(coeffs, w) - z
        if f.real * f.real + f.imag * f.imag <= tol_sq:
            return w, True
        w -= f / poly_fp(coeffs, w)
    f = poly_f(coeffs, w) - z
    return w, f.real * f.real + f.imag * f.imag <= tol_sq


@njit(cache=True, inline="always")
def _project_angle(coeffs, z, t0):
    """Boundary parameter minimizing |F(e^it) - z| (Newton on tangency)."""
    t = t0
    for _ in range(24):
        ew = complex(np.cos(t), np.sin(t))
        f = poly_f(coeffs, ew) - z
        fp = poly_fp(coeffs, ew)
        fpp = poly_fpp(coeffs, ew)
        c1 = 1j * ew * fp
        c2 = -ew * fp - ew * ew * fpp
        g = f.real * c1.real + f.imag * c1.imag
        gp = c1.real * c1.real + c1.imag * c1.imag + f.real * c2.real + f.imag * c2.imag
        dt = g / gp
        t -= dt
        if dt * dt < 1e-28:
            break
    return t


# ---------------------------------------------------------------------------
# domain walk
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _lut_sector(zr, zi, n_lut):
    ang = np.arctan2(zi, zr)
    sec = int((ang + PI) * (n_lut / TWO_PI))
    if sec >= n_lut:
        sec = n_lut - 1
    if sec < 0:
        sec = 0
    return sec


@njit(cache=True, inline="always")
def _jump(key, ctr, zr, zi, h, delta, n, max_steps):
    """One far-field block: k steps collapsed into an isotropic displacement.

    delta is a certified lower bound on dist(z, boundary) minus h; the draw
    is clamped to delta, so no exit can occur inside the block.
    """
    k = np.int64(delta * delta / (20.25 * h * h))  # per-coord sigma = delta/9
    rem = max_steps - n
    if k > rem:
        k = rem
    u1 = u01(key, ctr)
    ctr += U1
    u2 = u01(key, ctr)
    ctr += U1
    rad = 0.5 * h * np.sqrt(float(k)) * np.sqrt(-2.0 * np.log(1.0 - u1))
    if rad > delta:
        rad = delta
    return zr + rad * np.cos(TWO_PI * u2), zi + rad * np.sin(TWO_PI * u2), ctr, n + k


@njit(cache=True, inline="always")
def _domain_one(key, coeffs, is_identity, zr0, zi0, h, max_steps,
                r_in, r_in_sq, r_out_sq, lut_t, lut_br,
                grid, gs, gn, jump_thresh, tol_sq):
    """One trajectory; returns (t_boundary, zr, zi, steps, status).

    grid is the float32 classification grid over [-gs, gs]^2 (gn x gn): a
    positive value is a certified lower bound on dist(cell, boundary);
    GRID_AMBIG cells need Newton; GRID_OUTSIDE cells have exited.  For the
    identity map the exact distance 1 - |z| replaces the grid.
    delta tracks the bound at the current position (-1 when unknown).
    """
    ctr = np.uint64(0)
    zr = zr0
    zi = zi0
    n = np.int64(0)
    n_lut = lut_t.shape[0]
    ginv = gn / (2.0 * gs)
    delta = -1.0
    jumping = jump_thresh > 0.0
    # cheap |z|^2 pre-gates below which a jump is possible at all
    pre1 = 1.0 - jump_thresh
    pre1_sq = pre1 * pre1 if (jumping and pre1 > 0.0) else -1.0
    pre2 = r_in - jump_thresh
    pre2_sq = pre2 * pre2 if (jumping and pre2 > 0.0) else -1.0
    while n < max_steps:
        if delta > jump_thresh and jumping:
            zr, zi, ctr, n = _jump(key, ctr, zr, zi, h, delta - h, n, max_steps)
            if is_identity:
                delta = 1.0 - np.sqrt(zr * zr + zi * zi)
            else:
                ix = np.int64((zr + gs) * ginv)
                iy = np.int64((zi + gs) * ginv)
                delta = grid[iy * gn + ix]
            continue
        a, b, ctr = _disk_point(key, ctr)
        zr += h * a
        zi += h * b
        n += 1
        rsq = zr * zr + zi * zi
        if is_identity:
            if rsq < 1.0:
                delta = 1.0 - np.sqrt(rsq) if rsq < pre1_sq else 0.0
                continue
            t = np.arctan2(zi, zr)
            return t, zr, zi, n, STATUS_OK
        if rsq < r_in_sq:
            delta = r_in - np.sqrt(rsq) if rsq < pre2_sq else 0.0
            continue
        if rsq <= r_out_sq:
            ix = np.int64((zr + gs) * ginv)
            iy = np.int64((zi + gs) * ginv)
            c = grid[iy * gn + ix]
            if c > 0.0:
                delta = c
                continue
        else:
            c = GRID_OUTSIDE
        delta = 0.0
        z = complex(zr, zi)
        sec = _lut_sector(zr, zi, n_lut)
        if c == GRID_OUTSIDE:
            t = _project_angle(coeffs, z, lut_t[sec])
            return t, zr, zi, n, STATUS_OK
        ew = complex(np.cos(lut_t[sec]), np.sin(lut_t[sec]))
        w0 = ew * (np.sqrt(rsq) / lut_br[sec])
        w, ok = _invert_newton(coeffs, z, w0, tol_sq, 40)
        if not ok:
            return 0.0, zr, zi, n, STATUS_GEOMETRY
        if w.real * w.real + w.imag * w.imag < 1.0:
            continue
        t = _project_angle(coeffs, z, np.arctan2(w.imag, w.real))
        return t, zr, zi, n, STATUS_OK
    return 0.0, zr, zi, n, STATUS_CENSORED


@njit(cache=True, parallel=True)
def domain_record(seed, n_samples, coeffs, is_identity, zr0, zi0, h, max_steps,
                  r_in, r_in_sq, r_out_sq, lut_t, lut_br, grid, gs, gn,
                  jump_thresh, tol_sq, shard_size, t_out, status, points,
                  shard_steps):
    record_points = points.shape[0] > 0
    n_shards = shard_steps.shape[0]
    for s in prange(n_shards):
        lo = s * shard_size
        hi = min(lo + shard_size, n_samples)
        steps = np.int64(0)
        for j in range(hi - lo):
            key = stream_key(seed, s, j)
            t, zr, zi, n, st = _domain_one(
                key, coeffs, is_identity, zr0, zi0, h, max_steps,
                r_in, r_in_sq, r_out_sq, lut_t, lut_br, grid, gs, gn,
                jump_thresh, tol_sq)
            steps += n
            idx = lo + j
            status[idx] = st
            t_out[idx] = t if st == STATUS_OK else np.nan
            if record_points:
                points[idx] = complex(zr, zi)
        shard_steps[s] = steps


# ---------------------------------------------------------------------------
# occupation (Green's function) walk: tallies every visited position
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def domain_occupation(seed, n_samples, coeffs, is_identity, h, max_steps,
                      r_in_sq, r_out_sq, lut_t, lut_br, tol_sq, shard_size,
                      bx0, by0, bin_w, nx, ny,
                      collar_lo, collar_hi,
                      bin_counts, collar_counts, shard_steps, shard_censored,
                      shard_geom):
    """Walk from the origin; tally positions S_0..S_{T-1} into square bins.

    Collar bands (identity map only): radial shells 1-u*h for u in
    [collar_lo[i], collar_hi[i]).  No far-field jumps here: the estimator
    is the occupation measure itself.
    """
    n_collar = collar_lo.shape[0]
    n_shards = shard_steps.shape[0]
    for s in prange(n_shards):
        lo = s * shard_size
        hi = min(lo + shard_size, n_samples)
        steps = np.int64(0)
        cen = np.int64(0)
        geo = np.int64(0)
        for j in range(hi - lo):
            key = stream_key(seed, s, j)
            ctr = np.uint64(0)
            zr = 0.0
            zi = 0.0
            n = np.int64(0)
            while True:
                # tally current (inside) position
                ix = np.int64(np.floor((zr - bx0) / bin_w))
                iy = np.int64(np.floor((zi - by0) / bin_w))
                if 0 <= ix < nx and 0 <= iy < ny:
                    bin_counts[s, iy * nx + ix] += 1
                if n_collar > 0:
                    l = 1.0 - np.sqrt(zr * zr + zi * zi)
                    for c in range(n_collar):
                        if collar_lo[c] * h <= l < collar_hi[c] * h:
                            collar_counts[s, c] += 1
                            break
                if n >= max_steps:
                    cen += 1
                    break
                a, b, ctr = _disk_point(key, ctr)
                zr += h * a
                zi += h * b
                n += 1
                rsq = zr * zr + zi * zi
                if rsq < r_in_sq:
                    continue
                if is_identity:
                    if rsq < 1.0:
                        continue
                    break
                z = complex(zr, zi)
                if rsq > r_out_sq:
                    break
                sec = _lut_sector(zr, zi, lut_t.shape[0])
                ew = complex(np.cos(lut_t[sec]), np.sin(lut_t[sec]))
                w0 = ew * (np.sqrt(rsq) / lut_br[sec])
                w, ok = _invert_newton(coeffs, z, w0, tol_sq, 40)
                if not ok:
                    geo += 1
                    break
                if w.real * w.real + w.imag * w.imag >= 1.0:
                    break
            steps += n
        shard_steps[s] = steps
        shard_censored[s] = cen
        shard_geom[s] = geo
