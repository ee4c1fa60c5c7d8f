import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from radiorepeat.errors import InputError, InsufficientDataError
from radiorepeat.repeatability import (PairedSeries, Reliability, ReliabilityThresholds,
                                       agreement_limits, bland_altman, icc, icc_2_1,
                                       percent_differences, reliability_category, shapiro_wilk,
                                       spearman)

from . import oracles


def pairs_with_differences(diffs, base=50.0):
    """Pairs whose pair-mean percent differences are ``diffs``."""
    d = np.asarray(diffs, dtype=float)
    test = np.full(len(d), base)
    retest = test * (200 + d) / (200 - d)
    return PairedSeries("x", test, retest)


def normal_scores(n, mean, sd):
    z = stats.norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    z = (z - z.mean()) / z.std(ddof=1)
    return mean + sd * z


def test_percent_differences():
    d, excluded = percent_differences(PairedSeries("x", [1, 2, 3], [1, 2, 3]))
    assert d.tolist() == [0, 0, 0] and excluded == 0
    d, _ = percent_differences(PairedSeries("x", [10, 10, 10], [12, 0, 10]))
    assert d[0] == pytest.approx(200 / 11, rel=1e-15)
    assert d[1] == -200.0


def test_percent_differences_excludes_zero_mean():
    d, excluded = percent_differences(PairedSeries("x", [1, -1, 2, 3], [1, 1, 2, 4]))
    assert excluded == 1 and len(d) == 3


def test_series_validation():
    with pytest.raises(InsufficientDataError):
        PairedSeries("x", [1, 2], [1, 2])
    with pytest.raises(InputError):
        PairedSeries("x", [1, 2, 3], [1, 2])
    with pytest.raises(InputError):
        PairedSeries("x", [1, 2, np.nan], [1, 2, 3])


def test_shapiro_monte_carlo():
    normal_pass = sum(shapiro_wilk(np.random.default_rng(s).standard_normal(100)) >= 0.05
                      for s in range(100))
    lognormal_fail = sum(shapiro_wilk(np.random.default_rng(s).lognormal(0, 1, 100)) < 0.05
                         for s in range(100))
    assert normal_pass >= 90
    assert lognormal_fail >= 95


def test_shapiro_edge_cases():
    assert shapiro_wilk(np.ones(10)) == 0.0
    with pytest.raises(InputError):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(InputError):
        shapiro_wilk(np.arange(5001.0))


def test_bland_altman_three_diffs():
    res = bland_altman(pairs_with_differences([-1.0, 0.0, 1.0]))
    assert res.normal and not res.log_transformed
    assert res.mean_pct == pytest.approx(0.0, abs=1e-12)
    assert res.sd_pct == pytest.approx(1.0, rel=1e-12)
    assert res.lower_limit_pct == pytest.approx(-1.96, rel=1e-12)
    assert res.upper_limit_pct == pytest.approx(1.96, rel=1e-12)


def test_bland_altman_identical():
    res = bland_altman(PairedSeries("x", [1, 5, 9, 2], [1, 5, 9, 2]))
    assert (res.mean_pct, res.sd_pct, res.lower_limit_pct, res.upper_limit_pct) == (0, 0, 0, 0)
    assert not res.log_transformed


def test_bland_altman_published_volume_limits():
    res = bland_altman(pairs_with_differences(normal_scores(73, -1.4, 11.1)))
    assert res.normal and not res.log_transformed
    assert res.mean_pct == pytest.approx(-1.4, abs=1e-9)
    assert res.sd_pct == pytest.approx(11.1, abs=1e-9)
    assert abs(res.upper_limit_pct - 20.3) <= 0.1
    assert abs(res.lower_limit_pct - (-23.2)) <= 0.1


def test_bland_altman_log_path():
    rng = np.random.default_rng(5)
    test = rng.uniform(1, 10, 60)
    retest = test * np.exp(rng.exponential(0.3, 60) - 0.3)
    s = PairedSeries("x", test, retest)
    res = bland_altman(s)
    assert not res.normal and res.log_transformed
    r = np.log(retest / test)
    m, sd = r.mean(), r.std(ddof=1)
    assert res.upper_limit_pct == pytest.approx(100 * (np.exp(m + 1.96 * sd) - 1), rel=1e-12)
    assert res.lower_limit_pct == pytest.approx(100 * (np.exp(m - 1.96 * sd) - 1), rel=1e-12)
    assert res.lower_limit_pct < res.upper_limit_pct


def test_bland_altman_log_path_rejects_nonpositive():
    rng = np.random.default_rng(5)
    test = rng.uniform(1, 10, 60)
    retest = test * np.exp(rng.exponential(0.3, 60) - 0.3)
    test[0] = -0.5
    retest[0] = 2.0
    with pytest.raises(InputError):
        bland_altman(PairedSeries("x", test, retest))
    assert not bland_altman(PairedSeries("x", test, retest), log_fallback=False).log_transformed


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_bland_altman_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    test = rng.uniform(5, 15, 30)
    s = PairedSeries("x", test, test + rng.normal(0, 0.5, 30))
    a, b = bland_altman(s, log_fallback=False), bland_altman(s.swapped(), log_fallback=False)
    assert b.mean_pct == -a.mean_pct
    assert b.sd_pct == a.sd_pct


def test_agreement_limits_coverage():
    d = np.random.default_rng(11).normal(2.0, 7.0, 100_000)
    _, _, lo, hi = agreement_limits(d)
    inside = np.mean((d >= lo) & (d <= hi))
    assert abs(inside - 0.95) <= 0.005


def test_reliability_thresholds_published():
    t = ReliabilityThresholds(11.1)
    assert (t.cut_very, t.cut_reliable, t.cut_moderate) == pytest.approx((5.55, 16.65, 22.2))
    assert reliability_category(3.6, t) is Reliability.VERY_RELIABLE
    assert reliability_category(23.8, t) is Reliability.POORLY_RELIABLE
    assert reliability_category(5.55, t) is Reliability.VERY_RELIABLE
    assert reliability_category(16.65, t) is Reliability.RELIABLE
    assert reliability_category(22.2, t) is Reliability.MODERATELY_RELIABLE


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(0, 50), st.floats(0.1, 30))
def test_reliability_monotone(a, b, voi):
    t = ReliabilityThresholds(voi)
    order = list(Reliability)
    lo, hi = sorted((a, b))
    assert order.index(reliability_category(lo, t)) <= order.index(reliability_category(hi, t))


def test_spearman_hand_examples():
    x = [1, 2, 3, 4, 5]
    assert spearman(x, np.exp(x)).rs == 1.0
    assert spearman(x, x[::-1]).rs == -1.0
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]).rs == pytest.approx(0.8, abs=1e-15)


def test_spearman_constant_is_undefined():
    res = spearman([1, 2, 3, 4], [5, 5, 5, 5])
    assert not res.defined and np.isnan(res.rs)
    with pytest.raises(InsufficientDataError):
        spearman([1, 2, 3], [1, 2, 3])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=4, max_size=25))
def test_spearman_matches_bruteforce_and_scipy(pairs):
    x, y = map(list, zip(*pairs))
    res = spearman(x, y)
    if len(set(x)) == 1 or len(set(y)) == 1:
        assert not res.defined
        return
    assert res.rs == pytest.approx(oracles.spearman_bruteforce(x, y), abs=1e-9)
    ref = stats.spearmanr(x, y)
    assert res.rs == pytest.approx(ref.statistic, abs=1e-9)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_spearman_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=20), rng.normal(size=20)
    assert spearman(np.exp(x), y ** 3).rs == pytest.approx(spearman(x, y).rs, abs=1e-12)


def test_icc_shrout_fleiss_table():
    # six targets rated by four judges; published ICC(2,1) = .29
    y = [[9, 2, 5, 8], [6, 1, 3, 2], [8, 4, 6, 8], [7, 1, 2, 6], [10, 5, 6, 9], [6, 2, 4, 7]]
    assert round(icc_2_1(y), 2) == 0.29
    assert icc_2_1(y) == pytest.approx(oracles.icc21_bruteforce(y), abs=1e-12)


def test_icc_hand_table():
    y = [[1, 2], [3, 3], [5, 7], [2, 2]]
    assert icc(PairedSeries("x", *zip(*y))) == pytest.approx(oracles.icc21_bruteforce(y), abs=1e-9)


def test_icc_identical_and_constant():
    assert icc(PairedSeries("x", [1, 4, 2, 8], [1, 4, 2, 8])) == pytest.approx(1.0, abs=1e-12)
    assert icc(PairedSeries("x", [3, 3, 3], [3, 3, 3])) == 1.0


def test_icc_independent_is_small():
    rng = np.random.default_rng(99)
    test = rng.normal(10, 2, 200)
    assert abs(icc(PairedSeries("x", test, rng.permutation(test)))) < 0.2
