"""Figure renderers for the diskwalk CSV schemas.

Each kind consumes one public CSV (comment preamble + header row) and
writes a deterministic PNG: fixed canvas, fonts and axis policy, no
timestamps or random styling.  Inputs are never modified.
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (6.4, 4.2)
DPI = 130

KINDS = ("k_convergence", "density_curve", "sweep_extrapolation",
         "greens_heatmap", "potential_residual")

REQUIRED_COLUMNS = {
    "k_convergence": ["theta", "weight", "wtheta", "estimate", "stderr", "n"],
    "density_curve": ["phi", "m", "rho", "sigma"],
    "sweep_extrapolation": ["h", "mc", "mc_stderr", "exact", "ratio", "ratio_stderr"],
    "greens_heatmap": ["x", "y", "gh_scaled", "gd8", "diff", "visits"],
    "potential_residual": ["r", "a", "residual"],
}


class SchemaError(ValueError):
    """Input CSV does not carry the columns the figure kind needs."""


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    out_path: str
    summary_json: Optional[str] = None
    deterministic: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choices: {KINDS}")


def read_table(path: str) -> dict[str, np.ndarray]:
    """Read a schema CSV (comment preamble, header row, numeric columns)."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    cols: dict[str, list[float]] = {h: [] for h in header}
    for line in lines[1:]:
        if not line.strip():
            continue
        for h, tok in zip(header, line.split(",")):
            try:
                cols[h].append(float(tok))
            except ValueError:
                cols[h].append(float("nan"))
    return {h: np.asarray(v) for h, v in cols.items()}


def check_columns(table: dict, kind: str, path: str) -> None:
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in table]
    if missing:
        raise SchemaError(f"{path}: missing columns for {kind}: {', '.join(missing)}")


def _new_axes():
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, out_path: str) -> None:
    d = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(d, exist_ok=True)
    fig.savefig(out_path, format="png", metadata={"Software": None})
    plt.close(fig)


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns a small info dict for callers/tests."""
    table = read_table(spec.input_csv)
    check_columns(table, spec.kind, spec.input_csv)
    info: dict = {"kind": spec.kind, "out_path": spec.out_path}

    if spec.kind == "k_convergence":
        ok = np.isfinite(table["theta"]) & np.isfinite(table["wtheta"])
        th = table["theta"][ok]
        y = table["wtheta"][ok] * table["estimate"][ok]
        band = 2.0 * table["wtheta"][ok] * table["stderr"][ok]
        order = np.argsort(th)
        th, y, band = th[order], y[order], band[order]
        fig, ax = _new_axes()
        ax.fill_between(th, y - band, y + band, alpha=0.3, color="tab:blue",
                        label="+-2 sigma")
        ax.plot(th, y, "o-", ms=3, color="tab:blue", label="w(theta) E(theta)")
        ax.set_xlabel("theta")
        ax.set_ylabel("integrand")
        ax.set_title("K quadrature integrand per node")
        ax.legend(loc="best")
        _save(fig, spec.out_path)
        info["nodes"] = int(ok.sum())

    elif spec.kind == "density_curve":
        phi = table["phi"]
        fig, ax = _new_axes()
        ax.plot(phi, table["rho"], color="tab:blue", label="rho")
        ax.plot(phi, table["sigma"], color="tab:orange", label="sigma_D")
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("phi")
        ax.set_ylabel("density")
        ax.set_title("correction density on the boundary angle grid")
        ax.legend(loc="best")
        _save(fig, spec.out_path)
        info["rho_range"] = (float(table["rho"].min()), float(table["rho"].max()))

    elif spec.kind == "sweep_extrapolation":
        h = table["h"]
        ratio = table["ratio"]
        err = table["ratio_stderr"]
        fig, ax = _new_axes()
        ax.errorbar(h, ratio, yerr=err, fmt="o", capsize=3, color="tab:blue",
                    label="(mc - exact)/h")
        fit_drawn = False
        if len(h) >= 2:
            w = 1.0 / np.maximum(err, 1e-300) ** 2
            a_mat = np.column_stack([np.ones_like(h), h]) * np.sqrt(w)[:, None]
            coef, *_ = np.linalg.lstsq(a_mat, ratio * np.sqrt(w), rcond=None)
            hs = np.linspace(0.0, float(h.max()) * 1.05, 64)
            ax.plot(hs, coef[0] + coef[1] * hs, "-", color="tab:blue",
                    label=f"weighted fit (intercept {coef[0]:.4g})")
            fit_drawn = True
        predicted = None
        if spec.summary_json:
            with open(spec.summary_json) as f:
                predicted = json.load(f).get("summary", {}).get("predicted_slope")
        if predicted is not None:
            ax.axhline(predicted, color="tab:red", ls="--",
                       label=f"predicted slope {predicted:.4g}")
        ax.set_xlabel("h")
        ax.set_ylabel("correction ratio")
        ax.set_title("first-order correction: extrapolation in h")
        ax.legend(loc="best")
        _save(fig, spec.out_path)
        info["fit_drawn"] = fit_drawn
        info["predicted"] = predicted

    elif spec.kind == "greens_heatmap":
        x, y, diff = table["x"], table["y"], table["diff"]
        fig, ax = _new_axes()
        lim = float(np.abs(diff).max()) or 1.0
        sc = ax.scatter(x, y, c=diff, cmap="RdBu_r", vmin=-lim, vmax=lim,
                        marker="s", s=160 * (4.2 / max(len(x), 1)) ** 0 * 4)
        fig.colorbar(sc, ax=ax, label="h^2 G_h - 8 G_D")
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title("occupation Green's function minus continuum limit")
        _save(fig, spec.out_path)
        info["bins"] = len(x)

    elif spec.kind == "potential_residual":
        r, resid = table["r"], table["residual"]
        fig, ax = _new_axes()
        ax.semilogx(r, resid, "o-", color="tab:blue")
        ax.set_xlabel("|x|")
        ax.set_ylabel("a(x) - (4/pi) ln|x|")
        ax.set_title("potential kernel residual (approaches C0)")
        _save(fig, spec.out_path)
        info["residual_spread"] = float(resid.max() - resid.min())

    return info
