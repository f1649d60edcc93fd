"""Secondary acceptance: all five figure kinds render from golden CSVs,
the sweep figure carries the fit line and prediction reference, and
deterministic mode produces byte-identical images."""

import os

from plotkit import FigureSpec, render

DATA = os.path.join(os.path.dirname(__file__), "data")

GOLDEN = {
    "k_convergence": "k-constant.csv",
    "density_curve": "density-cardioid.csv",
    "sweep_extrapolation": "sweep.csv",
    "greens_heatmap": "greens.csv",
    "potential_residual": "potential.csv",
}


def test_criterion_11_all_kinds_render(tmp_path):
    results = {}
    for kind, csv in GOLDEN.items():
        out = tmp_path / f"{kind}.png"
        summary = f"{DATA}/sweep.json" if kind == "sweep_extrapolation" else None
        info = render(FigureSpec(f"{DATA}/{csv}", kind, str(out),
                                 summary_json=summary, deterministic=True))
        assert out.exists() and out.stat().st_size > 1000
        results[kind] = info
    assert results["sweep_extrapolation"]["fit_drawn"] is True
    assert results["sweep_extrapolation"]["predicted"] is not None

    # byte-identical rerun for every kind
    for kind, csv in GOLDEN.items():
        a, b = tmp_path / f"{kind}_a.png", tmp_path / f"{kind}_b.png"
        summary = f"{DATA}/sweep.json" if kind == "sweep_extrapolation" else None
        for p in (a, b):
            render(FigureSpec(f"{DATA}/{csv}", kind, str(p),
                              summary_json=summary, deterministic=True))
        assert a.read_bytes() == b.read_bytes(), kind
    print("ACCEPTANCE 11: PASS - five figure kinds rendered, fit + prediction "
          "reference present, deterministic bytes identical")
