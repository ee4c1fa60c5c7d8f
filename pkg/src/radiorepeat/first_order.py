"""First-order (histogram) metrics computed on raw masked intensities."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .quantization import bin_index
from .volume_io import RoiSample

HIST_BINS = 64


@dataclass(frozen=True)
class FirstOrderResult:
    min: float
    max: float
    mean: float
    sd: float
    median: float
    skewness: float
    kurtosis: float
    energy: float
    entropy_hist: float
    ch_auc: float
    degenerate: bool = False

    def as_features(self) -> dict[str, float]:
        return {f"fo.{f.name}": getattr(self, f.name) for f in fields(self) if f.name != "degenerate"}


def _values(roi) -> np.ndarray:
    values = roi.intensities if isinstance(roi, RoiSample) else np.asarray(roi, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("empty roi")
    return values


def cumulative_histogram_auc(roi) -> tuple[float, bool]:
    """Area under F(u) = fraction of voxels with normalized intensity >= u, u in [0, 1].

    Returns ``(auc, degenerate)``; a constant roi gives ``(1.0, True)``.
    """
    values = _values(roi)
    lo, hi = values.min(), values.max()
    if hi <= lo:
        return 1.0, True
    u = np.sort((values - lo) / (hi - lo))
    steps, first = np.unique(u, return_index=True)
    # F is constant on (steps[k-1], steps[k]] with value (N - first[k]) / N
    n = len(u)
    widths = np.diff(np.concatenate([[0.0], steps]))
    heights = (n - first) / n
    return float(np.sum(widths * heights)), False


def first_order_features(roi, hist_bins: int = HIST_BINS) -> FirstOrderResult:
    values = _values(roi)
    lo, hi = float(values.min()), float(values.max())
    mean = float(values.mean())
    centred = values - mean
    m2 = float(np.mean(centred ** 2))
    degenerate = m2 == 0.0 or hi == lo
    if degenerate:
        skew = kurt = 0.0
    else:
        skew = float(np.mean(centred ** 3) / m2 ** 1.5)
        kurt = float(np.mean(centred ** 4) / m2 ** 2)

    counts = np.bincount(bin_index(values, lo, hi, hist_bins), minlength=hist_bins + 1)[1:]
    p = counts[counts > 0] / values.size
    energy = float(np.sum(p ** 2))
    entropy = float(-np.sum(p * np.log2(p))) + 0.0
    auc, _ = cumulative_histogram_auc(values)

    return FirstOrderResult(
        min=lo,
        max=hi,
        mean=mean,
        sd=float(np.sqrt(m2)),
        median=float(np.median(values)),
        skewness=skew,
        kurtosis=kurt,
        energy=energy,
        entropy_hist=entropy,
        ch_auc=auc,
        degenerate=degenerate,
    )
