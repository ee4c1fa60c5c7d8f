"""Grey-level quantization: fixed bin count and fixed bin width."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InputError
from .volume_io import RoiSample

# Bin coordinates within this distance of an integer are snapped to it before
# floor/ceil, so that exact-arithmetic boundaries survive float rounding.
SNAP_TOL = 1e-9

DEFAULT_WIDTH = {"SUV": 0.5, "HU": 10.0}


@dataclass(frozen=True)
class QuantizationSpec:
    mode: Literal["fixed_bins", "fixed_width"]
    bins: int = 64
    width: float = 0.5

    def __post_init__(self):
        if self.mode == "fixed_bins":
            if int(self.bins) != self.bins or self.bins < 2:
                raise InputError(f"bin count must be an integer >= 2, got {self.bins}")
        elif self.mode == "fixed_width":
            if not (np.isfinite(self.width) and self.width > 0):
                raise InputError(f"bin width must be positive, got {self.width}")
        else:
            raise InputError(f"unknown quantization mode {self.mode!r}")

    @property
    def tag(self) -> str:
        """Feature-name suffix, e.g. ``bins64`` or ``w0.5``."""
        if self.mode == "fixed_bins":
            return f"bins{int(self.bins)}"
        return f"w{self.width:g}"

    @classmethod
    def parse(cls, text: str, unit: str = "SUV") -> "QuantizationSpec":
        """Parse ``bins:<B>``, ``width:<W>`` or bare ``width`` (unit default)."""
        kind, _, value = text.strip().partition(":")
        try:
            if kind == "bins":
                return cls("fixed_bins", bins=int(value or 64))
            if kind == "width":
                return cls("fixed_width", width=float(value) if value else DEFAULT_WIDTH.get(unit, 0.5))
        except ValueError:
            pass
        raise InputError(f"cannot parse quantization {text!r}; use bins:<B> or width:<W>")


@dataclass(frozen=True)
class QuantizedRoi:
    coords: np.ndarray  # int64 (N, 3)
    levels: np.ndarray  # int64 (N,), values in 1..n_levels
    spacing: tuple[float, float, float]
    n_levels: int
    spec: QuantizationSpec | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, 3)
        levels = np.asarray(self.levels, dtype=np.int64).ravel()
        if len(coords) == 0 or len(coords) != len(levels):
            raise InputError("quantized roi needs equal, non-zero numbers of coords and levels")
        if levels.min() < 1 or levels.max() > self.n_levels:
            raise InputError(f"levels must lie in [1, {self.n_levels}]")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return len(self.levels)

    def grid(self) -> np.ndarray:
        """Bounding-box level grid with 0 outside the roi and a 1-voxel zero border."""
        c = self.coords - self.coords.min(axis=0) + 1
        out = np.zeros(tuple(c.max(axis=0) + 2), dtype=np.int64)
        out[c[:, 0], c[:, 1], c[:, 2]] = self.levels
        return out


def _snap(x: np.ndarray) -> np.ndarray:
    r = np.rint(x)
    close = np.abs(x - r) <= SNAP_TOL
    return np.where(close, r, x)


def bin_index(values, lo: float, hi: float, bins: int) -> np.ndarray:
    """Equal-width bin index in 1..bins over [lo, hi]; a constant range maps to 1."""
    values = np.asarray(values, dtype=np.float64)
    if hi <= lo:
        return np.ones(values.shape, dtype=np.int64)
    scaled = _snap(bins * (values - lo) / (hi - lo))
    return np.minimum(bins, np.floor(scaled).astype(np.int64) + 1)


def quantize_fixed_bins(roi: RoiSample, bins: int = 64) -> QuantizedRoi:
    spec = QuantizationSpec("fixed_bins", bins=bins)
    i = roi.intensities
    levels = bin_index(i, i.min(), i.max(), spec.bins)
    return QuantizedRoi(roi.coords, levels, roi.spacing, spec.bins, spec)


def quantize_fixed_width(roi: RoiSample, width: float) -> QuantizedRoi:
    spec = QuantizationSpec("fixed_width", width=width)
    idx = np.ceil(_snap(roi.intensities / spec.width)).astype(np.int64)
    levels = idx - idx.min() + 1
    return QuantizedRoi(roi.coords, levels, roi.spacing, int(levels.max()), spec)


def quantize(roi: RoiSample, spec: QuantizationSpec) -> QuantizedRoi:
    if spec.mode == "fixed_bins":
        return quantize_fixed_bins(roi, spec.bins)
    return quantize_fixed_width(roi, spec.width)
