import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from radiorepeat.first_order import cumulative_histogram_auc, first_order_features


def test_constant_roi():
    fo = first_order_features(np.full(20, 5.0))
    assert fo.min == fo.max == fo.mean == fo.median == 5.0
    assert fo.sd == 0.0
    assert fo.energy == 1.0
    assert fo.entropy_hist == 0.0
    assert fo.skewness == 0.0 and fo.kurtosis == 0.0
    assert fo.ch_auc == 1.0
    assert fo.degenerate


def test_symmetric_sample():
    fo = first_order_features(np.array([1.0, 2.0, 3.0, 4.0]))
    assert fo.mean == 2.5
    assert fo.median == 2.5
    assert fo.skewness == pytest.approx(0.0, abs=1e-15)
    # m2 = 1.25, m4 = 2.5625 -> 1.64
    assert fo.kurtosis == pytest.approx(1.64, abs=1e-12)


def test_uniform_histogram():
    fo = first_order_features(np.arange(64, dtype=float))
    assert fo.entropy_hist == pytest.approx(6.0, abs=1e-12)
    assert fo.energy == pytest.approx(1 / 64, abs=1e-15)


def test_ch_auc_hand_cases():
    assert cumulative_histogram_auc(np.array([0.0] * 5 + [1.0] * 5)) == (0.5, False)
    n = 9
    auc, _ = cumulative_histogram_auc(np.array([3.0] * (n - 1) + [-2.0]))
    assert auc == pytest.approx((n - 1) / n, abs=1e-15)
    assert cumulative_histogram_auc(np.full(4, 2.0)) == (1.0, True)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=80))
def test_ch_auc_bounds_and_mean_identity(values):
    v = np.asarray(values)
    auc, degenerate = cumulative_histogram_auc(v)
    assert 1 / len(v) - 1e-12 <= auc <= 1.0
    if not degenerate:
        # integral of P(U >= u) over [0, 1] equals E[U]
        u = (v - v.min()) / (v.max() - v.min())
        assert auc == pytest.approx(u.mean(), abs=1e-12)


def test_normal_moments_monte_carlo():
    x = np.random.default_rng(20261016).standard_normal(10_000)
    fo = first_order_features(x)
    assert abs(fo.skewness) <= 0.08
    assert abs(fo.kurtosis - 3.0) <= 0.2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=60),
       st.floats(0.1, 10), st.floats(-100, 100))
def test_affine_behaviour(values, a, b):
    v = np.asarray(values)
    assume(v.max() - v.min() > 1.0)
    scaled = 64 * (v - v.min()) / (v.max() - v.min())
    base = first_order_features(v)
    moved = first_order_features(a * v + b)
    for name in ("min", "max", "mean", "median"):
        assert getattr(moved, name) == pytest.approx(a * getattr(base, name) + b, rel=1e-9, abs=1e-9)
    assert moved.sd == pytest.approx(a * base.sd, rel=1e-9)
    for name in ("skewness", "kurtosis", "ch_auc"):
        assert getattr(moved, name) == pytest.approx(getattr(base, name), rel=1e-9, abs=1e-9)
    # histogram features: only voxels sitting on a bin edge may move
    interior = np.abs(scaled - np.rint(scaled)) > 1e-9
    if interior.all():
        assert moved.energy == pytest.approx(base.energy, abs=1e-12)
        assert moved.entropy_hist == pytest.approx(base.entropy_hist, abs=1e-12)


def test_feature_names():
    names = list(first_order_features(np.arange(5.0)).as_features())
    assert names == ["fo.min", "fo.max", "fo.mean", "fo.sd", "fo.median", "fo.skewness",
                     "fo.kurtosis", "fo.energy", "fo.entropy_hist", "fo.ch_auc"]


def test_empty_roi():
    with pytest.raises(ValueError):
        first_order_features(np.array([]))
