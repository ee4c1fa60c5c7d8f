"""Grey-level zone size matrix with 26-connected zones."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..quantization import QuantizedRoi

_CONNECT_26 = np.ones((3, 3, 3), dtype=bool)


@dataclass(frozen=True)
class Glzsm:
    counts: np.ndarray  # int64 (G, S): zones of level i+1 and size j+1
    n_levels: int
    n_voxels: int

    @property
    def n_zones(self) -> int:
        return int(self.counts.sum())


def zone_labels(q: QuantizedRoi) -> list[tuple[int, int]]:
    """(level, size) of every maximal 26-connected equal-level zone."""
    grid = q.grid()
    zones = []
    for level in np.unique(q.levels):
        labels, n = ndimage.label(grid == level, structure=_CONNECT_26)
        sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
        zones.extend((int(level), int(size)) for size in sizes)
    return zones


def build_glzsm(q: QuantizedRoi) -> Glzsm:
    zones = zone_labels(q)
    max_size = max(size for _, size in zones)
    counts = np.zeros((q.n_levels, max_size), dtype=np.int64)
    for level, size in zones:
        counts[level - 1, size - 1] += 1
    return Glzsm(counts, q.n_levels, len(q))


def glzsm_features(z: Glzsm) -> dict[str, float]:
    c = z.counts.astype(np.float64)
    nz = float(z.n_zones)
    i = np.arange(1, c.shape[0] + 1, dtype=np.float64)[:, None]
    j = np.arange(1, c.shape[1] + 1, dtype=np.float64)[None, :]
    i2, j2 = i ** 2, j ** 2
    return {
        "glzsm.szse": float(np.sum(c / j2) / nz),
        "glzsm.lzse": float(np.sum(c * j2) / nz),
        "glzsm.glnu": float(np.sum(c.sum(axis=1) ** 2) / nz),
        "glzsm.zsnu": float(np.sum(c.sum(axis=0) ** 2) / nz),
        "glzsm.zsp": nz / z.n_voxels,
        "glzsm.lglze": float(np.sum(c / i2) / nz),
        "glzsm.hglze": float(np.sum(c * i2) / nz),
        "glzsm.szlge": float(np.sum(c / (i2 * j2)) / nz),
        "glzsm.szhge": float(np.sum(c * i2 / j2) / nz),
        "glzsm.lzlge": float(np.sum(c * j2 / i2) / nz),
        "glzsm.lzhge": float(np.sum(c * i2 * j2) / nz),
    }
