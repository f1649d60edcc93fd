"""Command-line interface.

Subcommands: k-constant, k-limit, potential, density, sweep, greens,
blayer.  Exit codes: 0 success, 2 config error, 3 budget infeasible,
4 geometry/censoring failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_RUN = 4


def _int_arg(s: str) -> int:
    return int(float(s))


def _float_list(s: str) -> list[float]:
    return [float(t) for t in s.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser, default_out: str) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads (0 = all available; never affects results)")
    p.add_argument("--out", default=default_out)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--deterministic", action="store_true",
                   help="suppress timestamps and runtime-only header fields")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="diskwalk",
        description="Disk-step random walk: discrete harmonic measure and its "
                    "first-order boundary correction")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("k-constant", help="K by quadrature of the half-plane functional")
    p.add_argument("--nodes", type=_int_arg, default=32)
    p.add_argument("--samples-per-node", type=_int_arg, default=10**7)
    p.add_argument("--allocate", choices=("equal", "pilot"), default="equal")
    _add_common(p, "k-constant.csv")

    p = sub.add_parser("k-limit", help="conjectured K limit at large heights")
    p.add_argument("--y", type=_float_list, default=[1, 2, 4, 8, 16, 32])
    p.add_argument("--samples", type=_int_arg, default=10**7)
    _add_common(p, "k-limit.csv")

    p = sub.add_parser("potential", help="potential kernel values and C0 fit")
    p.add_argument("--radii", type=_float_list,
                   default=[5, 8, 11, 16, 20, 28, 40, 57, 80, 113, 160, 200])
    _add_common(p, "potential.csv")

    p = sub.add_parser("density", help="correction density rho and sigma_D")
    p.add_argument("--domain", default="cardioid")
    p.add_argument("--grid", type=_int_arg, default=512)
    p.add_argument("--k", type=float, default=None,
                   help="injected K value (default: repository golden value)")
    _add_common(p, "density.csv")

    p = sub.add_parser("sweep", help="correction slope sweep over h")
    p.add_argument("--domain", default="cardioid")
    p.add_argument("--g", default="re2")
    p.add_argument("--h", type=_float_list, default=[0.08, 0.04, 0.02])
    p.add_argument("--budget", type=_int_arg, default=2 * 10**7)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--grid", type=_int_arg, default=512)
    p.add_argument("--skip-pilot", action="store_true",
                   help="skip the budget feasibility pilot (testing only)")
    p.add_argument("--max-steps", type=_int_arg, default=10**9)
    _add_common(p, "sweep.csv")

    p = sub.add_parser("greens", help="occupation Green's function vs 8 G_D")
    p.add_argument("--domain", default="disk")
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--budget", type=_int_arg, default=10**6)
    p.add_argument("--bin-width", type=float, default=None, help="default 2h")
    p.add_argument("--collar", default="",
                   help="comma list of lo:hi collar bands in units of h "
                        "(unit disk only), e.g. '0.375:0.625'")
    p.add_argument("--collar-samples", type=_int_arg, default=10**6)
    _add_common(p, "greens.csv")

    p = sub.add_parser("blayer", help="boundary-layer generator: numeric vs formula")
    p.add_argument("--domain", default="disk")
    p.add_argument("--h", type=_float_list, default=[0.1, 0.05])
    p.add_argument("--l-fracs", type=_float_list, default=[0.0, 0.5, 1.0])
    p.add_argument("--fn", default="re_z2")
    p.add_argument("--angle", type=float, default=0.0)
    _add_common(p, "blayer.csv")

    return ap


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"out", "format"}
    if args.deterministic:
        skip.add("threads")
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _run(args: argparse.Namespace) -> int:
    # imports deferred so --threads can size the numba pool first
    if args.threads:
        os.environ.setdefault("NUMBA_NUM_THREADS", str(max(args.threads, 1)))

    from . import harness, io, kconst, potential
    from .config import HALFPLANE_MAX_STEPS, WalkConfig
    from .density import (K_GOLDEN, boundary_function, predicted_slope,
                          sigma_d)
    from .domain import make_domain
    from .walk import set_threads

    threads = set_threads(args.threads) if args.threads else set_threads(10**6)
    cfgd = _config_echo(args)
    summary: dict = {"error_counters": {"censored": 0, "geometry": 0}}

    if args.command == "k-constant":
        cfg = WalkConfig(h=1.0, seed=args.seed, samples=args.samples_per_node,
                         max_steps=HALFPLANE_MAX_STEPS)
        kb = kconst.k_by_quadrature(args.nodes, cfg, allocate=args.allocate)
        cols = ["theta", "weight", "wtheta", "estimate", "stderr", "n"]
        rows = [[kb.node_angles[j], kb.node_weights[j], kb.node_integrand_weights[j],
                 kb.node_estimates[j].mean, kb.node_estimates[j].stderr,
                 kb.node_estimates[j].n] for j in range(args.nodes)]
        rows.append(["K", "", "", kb.k_value.mean, kb.k_value.stderr, kb.k_value.n])
        summary.update(
            k_value=kb.k_value.mean, k_stderr=kb.k_value.stderr,
            constant_term=kb.constant_term, quadrature_error=kb.quadrature_error,
            quadrature_limited=kb.quadrature_limited,
            total_samples=kb.total_samples())
        summary["error_counters"]["censored"] = kb.k_value.censored

    elif args.command == "k-limit":
        cfg = WalkConfig(h=1.0, seed=args.seed, samples=args.samples,
                         max_steps=HALFPLANE_MAX_STEPS)
        res = kconst.k_by_limit(args.y, cfg)
        cols = ["y", "estimate", "stderr", "n"]
        rows = [[y, e.mean, e.stderr, e.n] for y, e in zip(res.heights, res.estimates)]
        summary.update(
            k_limit=res.terminal.mean, k_limit_stderr=res.terminal.stderr,
            increments=res.increments)
        summary["error_counters"]["censored"] = sum(e.censored for e in res.estimates)

    elif args.command == "potential":
        prof = potential.fit_c0(args.radii)
        cols = ["r", "a", "residual"]
        rows = [[r, a, res] for r, a, res in
                zip(prof.radii, prof.a_values, prof.residuals)]
        summary.update(c0_hat=prof.c0_hat, c0_ci=prof.c0_ci,
                       decay_coeff=prof.decay_coeff,
                       max_fit_residual=float(abs(prof.fit_residuals).max()))

    elif args.command == "density":
        dom = make_domain(args.domain)
        tbl = sigma_d(dom, args.k if args.k else K_GOLDEN, args.grid)
        cols = ["phi", "m", "rho", "sigma"]
        rows = [[tbl.grid[i], tbl.m_values[i], tbl.rho_values[i], tbl.sigma_values[i]]
                for i in range(tbl.grid_size)]
        summary.update(k_value=tbl.k_value, rho_mass=tbl.mass(),
                       max_abs_rho=float(abs(tbl.rho_values).max()))

    elif args.command == "sweep":
        dom = make_domain(args.domain)
        g = boundary_function(args.g)
        sw = harness.correction_sweep(
            g, dom, args.h, args.budget, seed=args.seed,
            k_value=args.k if args.k else K_GOLDEN, grid_size=args.grid,
            skip_pilot=args.skip_pilot, max_steps=args.max_steps)
        cols = ["h", "mc", "mc_stderr", "exact", "ratio", "ratio_stderr"]
        rows = [[float(h), e.mean, e.stderr, sw.exact_integral, float(r), float(s)]
                for h, e, r, s in zip(sw.h_values, sw.mc_integrals, sw.ratios,
                                      sw.ratio_stderrs)]
        summary.update(
            extrapolated_slope=sw.extrapolated_slope.mean,
            extrapolated_slope_stderr=sw.extrapolated_slope.stderr,
            predicted_slope=sw.predicted_slope, exact_integral=sw.exact_integral)
        summary["error_counters"]["censored"] = sum(e.censored for e in sw.mc_integrals)

    elif args.command == "greens":
        dom = make_domain(args.domain)
        bands = []
        if args.collar:
            for tok in args.collar.split(","):
                lo, hi = tok.split(":")
                bands.append((float(lo), float(hi)))
        gg = harness.greens_compare(
            dom, args.h, args.budget,
            args.bin_width if args.bin_width else 2.0 * args.h,
            seed=args.seed, collar_bands=bands, collar_samples=args.collar_samples)
        cols = ["x", "y", "gh_scaled", "gd8", "diff", "visits"]
        rows = [[float(gg.centers[i].real), float(gg.centers[i].imag),
                 float(gg.gh_scaled[i]), float(gg.gd8[i]), float(gg.diff[i]),
                 int(gg.visits[i])] for i in range(len(gg.centers))]
        summary.update(
            sup_diff=gg.sup_diff, mean_steps=gg.mean_steps,
            mass_ratio=gg.mass_ratio, low_visit_bins=gg.low_visit_bins,
            collar=[{"l_lo": c.l_lo, "l_hi": c.l_hi, "gh_scaled": c.gh_scaled,
                     "gh_stderr": c.gh_stderr, "predicted": c.predicted,
                     "visits": c.visits} for c in gg.collar])
        summary["error_counters"] = {"censored": gg.censored,
                                     "geometry": gg.geometry_errors}

    elif args.command == "blayer":
        dom = make_domain(args.domain)
        cols = ["h", "l", "numeric", "formula", "diff"]
        rows = []
        for h in args.h:
            for lf in args.l_fracs:
                bp = harness.boundary_layer_laplacian(dom, args.fn, args.angle, lf, h)
                rows.append([bp.h, bp.l, bp.numeric, bp.formula, bp.diff])
        summary.update(n_points=len(rows))

    else:  # pragma: no cover
        raise AssertionError(args.command)

    files = io.write_result(args.out, args.format, cols, rows, cfgd, summary,
                            args.deterministic)
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return _run(args)
    except Exception as e:  # map failures to contract exit codes
        from .harness import BudgetError, RunFailure
        from .domain import GeometryError

        msg = f"error: {e}"
        print(msg, file=sys.stderr)
        if isinstance(e, BudgetError):
            return EXIT_BUDGET
        if isinstance(e, (RunFailure, GeometryError)):
            return EXIT_RUN
        if isinstance(e, RuntimeError) and "censored fraction" in str(e):
            return EXIT_RUN
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
