#!/usr/bin/env python3
"""Deterministic cross-check of the half-plane exit functional.

Solves the harmonic equation of the killed walk,

    v(y) = E[ v(y + xi) ],  y > 0,      v(y) = -y,  y <= 0,

for a semicircle step xi, discretized on a uniform grid with Gauss
quadrature in the step variable and a flat far-field closure, then solved
as one sparse linear system.  Compares the solution against fresh Monte
Carlo estimates of the same functional.
"""

import argparse
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def solve_renewal(y_max=50.0, n_grid=5000, n_quad=240):
    ys = np.linspace(0.0, y_max, n_grid)
    dy = ys[1] - ys[0]
    xg, wg = np.polynomial.legendre.leggauss(n_quad)
    w = wg * (2.0 / math.pi) * np.sqrt(1.0 - xg**2)  # semicircle weights

    rows, cols, vals = [], [], []
    b = np.zeros(n_grid)
    for i, y in enumerate(ys):
        land = y + xg
        for lj, wj in zip(land, w):
            if lj <= 0.0:
                b[i] += wj * (-lj)          # exited: overshoot contribution
            elif lj >= y_max:
                j = n_grid - 1              # flat far-field closure
                rows.append(i), cols.append(j), vals.append(wj)
            else:
                f = lj / dy
                j = int(f)
                frac = f - j
                rows.append(i), cols.append(j), vals.append(wj * (1 - frac))
                rows.append(i), cols.append(j + 1), vals.append(wj * frac)
    a_mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_grid, n_grid))
    v = spla.spsolve(sp.identity(n_grid, format="csr") - a_mat, b)
    return ys, v


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=lambda s: int(float(s)), default=10**6)
    args = ap.parse_args()

    ys, v = solve_renewal()
    print("renewal solve:")
    for y in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
        print(f"  v({y:5.2f}) = {np.interp(y, ys, v):.6f}")

    from diskwalk.config import HALFPLANE_MAX_STEPS, WalkConfig
    from diskwalk.kconst import exit_functional

    print(f"\nMonte Carlo comparison ({args.samples:.0e} samples/height):")
    for y in (0.5, 1.0, 4.0, 32.0):
        est = exit_functional(y, WalkConfig(seed=123, samples=args.samples,
                                            max_steps=HALFPLANE_MAX_STEPS))
        ref = float(np.interp(y, ys, v))
        z = (est.mean - ref) / est.stderr if est.stderr else float("nan")
        print(f"  y={y:5.1f}: mc {est.mean:.6f} +- {est.stderr:.1e}  "
              f"renewal {ref:.6f}  ({z:+.1f} sigma)")


if __name__ == "__main__":
    main()
