"""Test-retest repeatability statistics.

Bland-Altman limits on percent differences (log-ratio fallback when the
differences fail a Shapiro-Wilk test), reliability categories relative to the
volume repeatability, Spearman rank correlation and ICC(2,1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from .errors import InputError, InsufficientDataError

Z_95 = 1.96
NORMALITY_ALPHA = 0.05


@dataclass(frozen=True)
class PairedSeries:
    feature_id: str
    test: np.ndarray
    retest: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.test, dtype=np.float64).ravel()
        r = np.asarray(self.retest, dtype=np.float64).ravel()
        if len(t) != len(r):
            raise InputError(f"{self.feature_id}: test and retest lengths differ")
        if len(t) < 3:
            raise InsufficientDataError(f"{self.feature_id}: need at least 3 pairs, got {len(t)}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(r))):
            raise InputError(f"{self.feature_id}: non-finite values")
        object.__setattr__(self, "test", t)
        object.__setattr__(self, "retest", r)

    def __len__(self) -> int:
        return len(self.test)

    def swapped(self) -> "PairedSeries":
        return PairedSeries(self.feature_id, self.retest, self.test)


@dataclass(frozen=True)
class BlandAltmanResult:
    mean_pct: float
    sd_pct: float
    lower_limit_pct: float
    upper_limit_pct: float
    n: int
    normal: bool
    log_transformed: bool
    n_excluded: int = 0
    n_outliers: int = 0


def percent_differences(s: PairedSeries) -> tuple[np.ndarray, int]:
    """``100 * (retest - test) / pair mean``; pairs with a zero mean are dropped.

    Returns ``(differences, n_excluded)``.
    """
    pair_mean = 0.5 * (s.test + s.retest)
    keep = pair_mean != 0
    d = 100.0 * (s.retest[keep] - s.test[keep]) / pair_mean[keep]
    return d, int(np.count_nonzero(~keep))


def shapiro_wilk(d) -> float:
    """Shapiro-Wilk p-value; a constant sample returns 0."""
    d = np.asarray(d, dtype=np.float64).ravel()
    if not 3 <= len(d) <= 5000:
        raise InputError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {len(d)}")
    if np.ptp(d) == 0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return float(stats.shapiro(d).pvalue)


def agreement_limits(d) -> tuple[float, float, float, float]:
    """(mean, sd, lower, upper) with sample SD and mean +- 1.96 SD."""
    d = np.asarray(d, dtype=np.float64)
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    return mean, sd, mean - Z_95 * sd, mean + Z_95 * sd


def bland_altman(s: PairedSeries, log_fallback: bool = True) -> BlandAltmanResult:
    """Repeatability limits of a paired series.

    ``mean_pct`` and ``sd_pct`` always describe the percent differences.
    When those fail the normality test and ``log_fallback`` is set, the limits
    are instead ``100 * (exp(m +- 1.96 s) - 1)`` from the log ratios
    ``ln(retest / test)``, which requires strictly positive values.
    """
    d, excluded = percent_differences(s)
    if len(d) < 3:
        raise InsufficientDataError(
            f"{s.feature_id}: {len(d)} usable pairs after excluding {excluded} with zero mean")
    mean, sd, lower, upper = agreement_limits(d)
    normal = shapiro_wilk(d) >= NORMALITY_ALPHA
    log_transformed = False
    # identical pairs: the limits collapse onto the mean on either path
    if not normal and log_fallback and sd > 0:
        if np.any(s.test <= 0) or np.any(s.retest <= 0):
            raise InputError(f"{s.feature_id}: log-ratio limits need strictly positive values")
        r = np.log(s.retest / s.test)
        m, sr = float(np.mean(r)), float(np.std(r, ddof=1))
        lower = 100.0 * math.expm1(m - Z_95 * sr)
        upper = 100.0 * math.expm1(m + Z_95 * sr)
        log_transformed = True
    outliers = int(np.count_nonzero(np.abs(d - mean) > 3 * sd)) if sd > 0 else 0
    return BlandAltmanResult(
        mean_pct=mean,
        sd_pct=sd,
        lower_limit_pct=lower,
        upper_limit_pct=upper,
        n=len(d),
        normal=bool(normal),
        log_transformed=log_transformed,
        n_excluded=excluded,
        n_outliers=outliers,
    )


class Reliability(str, Enum):
    VERY_RELIABLE = "very_reliable"
    RELIABLE = "reliable"
    MODERATELY_RELIABLE = "moderately_reliable"
    POORLY_RELIABLE = "poorly_reliable"


@dataclass(frozen=True)
class ReliabilityThresholds:
    voi_rep_sd: float

    def __post_init__(self):
        if not (np.isfinite(self.voi_rep_sd) and self.voi_rep_sd >= 0):
            raise InputError(f"volume repeatability SD must be >= 0, got {self.voi_rep_sd}")

    @property
    def cut_very(self) -> float:
        return 0.5 * self.voi_rep_sd

    @property
    def cut_reliable(self) -> float:
        return 1.5 * self.voi_rep_sd

    @property
    def cut_moderate(self) -> float:
        return 2.0 * self.voi_rep_sd


def reliability_category(feature_sd_pct: float, thresholds: ReliabilityThresholds) -> Reliability:
    if feature_sd_pct < 0:
        raise InputError("SD must be non-negative")
    if feature_sd_pct <= thresholds.cut_very:
        return Reliability.VERY_RELIABLE
    if feature_sd_pct <= thresholds.cut_reliable:
        return Reliability.RELIABLE
    if feature_sd_pct <= thresholds.cut_moderate:
        return Reliability.MODERATELY_RELIABLE
    return Reliability.POORLY_RELIABLE


@dataclass(frozen=True)
class CorrelationResult:
    rs: float
    p_value: float
    n: int
    defined: bool = True


def spearman(x, y) -> CorrelationResult:
    """Spearman rank correlation (average ranks for ties), two-sided t-approximation p-value.

    A constant series leaves the coefficient undefined: ``rs`` is NaN and
    ``defined`` is False.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(x) != len(y):
        raise InputError("spearman needs equal-length series")
    n = len(x)
    if n < 4:
        raise InsufficientDataError(f"spearman needs n >= 4, got {n}")
    rx = stats.rankdata(x) - (n + 1) / 2.0
    ry = stats.rankdata(y) - (n + 1) / 2.0
    den = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if den == 0:
        return CorrelationResult(float("nan"), float("nan"), n, defined=False)
    rs = float(np.clip(rx @ ry / den, -1.0, 1.0))
    if abs(rs) == 1.0:
        p = 0.0
    else:
        t = rs * math.sqrt((n - 2) / (1.0 - rs * rs))
        p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return CorrelationResult(rs, p, n)


def icc_2_1(ratings) -> float:
    """ICC(2,1) of an (n subjects x k raters) table.

    Two-way random effects, absolute agreement, single measurement. Zero
    total variance returns 1.0.
    """
    y = np.asarray(ratings, dtype=np.float64)
    n, k = y.shape
    grand = y.mean()
    ss_total = float(np.sum((y - grand) ** 2))
    if ss_total == 0:
        return 1.0
    ss_rows = k * float(np.sum((y.mean(axis=1) - grand) ** 2))
    ss_cols = n * float(np.sum((y.mean(axis=0) - grand) ** 2))
    ss_err = ss_total - ss_rows - ss_cols
    ms_rows = ss_rows / (n - 1)
    ms_cols = ss_cols / (k - 1)
    ms_err = ss_err / ((n - 1) * (k - 1))
    return (ms_rows - ms_err) / (ms_rows + (k - 1) * ms_err + k * (ms_cols - ms_err) / n)


def icc(s: PairedSeries) -> float:
    return icc_2_1(np.column_stack([s.test, s.retest]))
