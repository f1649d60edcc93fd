import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diskwalk.config import (MCEstimate, WalkConfig, WelfordState,
                             merge_shard_moments, plane_point, shard_layout,
                             SHARD_SIZE)


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(h=0.0)
    with pytest.raises(ValueError):
        WalkConfig(h=-1.0)
    with pytest.raises(ValueError):
        WalkConfig(samples=0)
    with pytest.raises(ValueError):
        WalkConfig(max_steps=0)
    cfg = WalkConfig(h=0.5, seed=3, samples=10)
    assert cfg.with_(h=1.0).h == 1.0 and cfg.with_(h=1.0).seed == 3


def test_plane_point_rejects_nonfinite():
    assert plane_point(1.0, -2.0) == complex(1.0, -2.0)
    with pytest.raises(ValueError):
        plane_point(float("nan"), 0.0)
    with pytest.raises(ValueError):
        plane_point(0.0, float("inf"))


def test_mcestimate_invariants():
    with pytest.raises(ValueError):
        MCEstimate(0.0, -1.0, 5)
    with pytest.raises(ValueError):
        MCEstimate(0.0, 0.0, 5, censored=6)
    e = MCEstimate(1.0, 0.1, 100, 2)
    assert e.combined_stderr(MCEstimate(0.0, 0.1, 50)) == pytest.approx(math.hypot(0.1, 0.1))


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=200))
@settings(max_examples=60, deadline=None)
def test_welford_matches_numpy(xs):
    w = WelfordState()
    for x in xs:
        w.add(x)
    est = w.estimate()
    assert est.mean == pytest.approx(np.mean(xs), rel=1e-12, abs=1e-12)
    expected = np.std(xs, ddof=1) / math.sqrt(len(xs))
    assert est.stderr == pytest.approx(expected, rel=1e-9, abs=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=120),
       st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_welford_merge_equals_single_pass(xs, pieces):
    chunks = np.array_split(np.asarray(xs), pieces)
    merged = WelfordState()
    for c in chunks:
        part = WelfordState()
        for x in c:
            part.add(float(x))
        merged.merge(part)
    ref = WelfordState()
    for x in xs:
        ref.add(float(x))
    assert merged.n == ref.n
    assert merged.mean == pytest.approx(ref.mean, rel=1e-10, abs=1e-12)
    assert merged.m2 == pytest.approx(ref.m2, rel=1e-8, abs=1e-9)


def test_merge_shard_moments_ordered():
    rows = np.array([[3, 1.0, 0.5], [2, 2.0, 0.1], [0, 0.0, 0.0]])
    st_ = merge_shard_moments(rows)
    assert st_.n == 5
    assert st_.mean == pytest.approx((3 * 1.0 + 2 * 2.0) / 5)


def test_shard_layout_covers_samples():
    for n in (1, SHARD_SIZE - 1, SHARD_SIZE, SHARD_SIZE + 1, 3 * SHARD_SIZE + 7):
        layout = shard_layout(n)
        assert sum(size for _, size in layout) == n
        assert [t for t, _ in layout] == list(range(len(layout)))
