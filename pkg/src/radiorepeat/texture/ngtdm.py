"""Neighbourhood grey-tone difference matrix over the 26-neighbourhood."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMatrixError
from ..quantization import QuantizedRoi
from ._neighbors import OFFSETS_26, core, shifted

EPSILON = 1e-6
COARSENESS_CAP = 1e6


@dataclass(frozen=True)
class Ngtdm:
    s: np.ndarray  # float64 (G,), summed |level - neighbourhood mean|
    n: np.ndarray  # int64 (G,), voxels with at least one in-roi neighbour
    n_levels: int

    @property
    def p(self) -> np.ndarray:
        return self.n / self.n.sum()


def build_ngtdm(q: QuantizedRoi) -> Ngtdm:
    grid = q.grid()
    centre = core(grid)
    nb_sum = np.zeros(centre.shape, dtype=np.int64)
    nb_count = np.zeros(centre.shape, dtype=np.int64)
    for d in OFFSETS_26:
        nb = shifted(grid, d)
        nb_sum += nb
        nb_count += nb > 0
    valid = (centre > 0) & (nb_count > 0)
    if not valid.any():
        raise EmptyMatrixError("every roi voxel is isolated; NGTDM is empty")
    levels = centre[valid]
    dev = np.abs(levels - nb_sum[valid] / nb_count[valid])
    g = q.n_levels
    n = np.bincount(levels - 1, minlength=g).astype(np.int64)
    # fsum keeps the per-level sums independent of accumulation order
    s = np.array([math.fsum(dev[levels == k]) for k in range(1, g + 1)])
    return Ngtdm(s, n, g)


def ngtdm_features(t: Ngtdm) -> tuple[dict[str, float], set[str]]:
    """Coarseness, contrast, busyness, complexity and strength."""
    present = t.n > 0
    lv = np.arange(1, t.n_levels + 1, dtype=np.float64)[present]
    p = t.p[present]
    s = t.s[present]
    n_vp = float(t.n.sum())
    n_gp = len(p)
    s_total = float(s.sum())
    ps = float(p @ s)
    degenerate = set()

    coarseness = min(COARSENESS_CAP, 1.0 / (EPSILON + ps))
    if coarseness == COARSENESS_CAP:
        degenerate.add("ngtdm.coarseness")

    di = lv[:, None] - lv[None, :]
    pi, pj = p[:, None], p[None, :]
    if n_gp > 1:
        contrast = float(np.sum(pi * pj * di ** 2) / (n_gp * (n_gp - 1)) * s_total / n_vp)
    else:
        contrast = 0.0
        degenerate.add("ngtdm.contrast")

    ip = lv * p
    busy_den = float(np.sum(np.abs(ip[:, None] - ip[None, :])))
    if busy_den > 0:
        busyness = ps / busy_den
    else:
        busyness = 0.0
        degenerate.add("ngtdm.busyness")

    complexity = float(np.sum(np.abs(di) * (pi * s[:, None] + pj * s[None, :]) / (pi + pj)) / n_vp)

    if s_total > 0:
        strength = float(np.sum((pi + pj) * di ** 2) / s_total)
    else:
        strength = 0.0
        degenerate.add("ngtdm.strength")

    feats = {
        "ngtdm.coarseness": float(coarseness),
        "ngtdm.contrast": contrast,
        "ngtdm.busyness": float(busyness),
        "ngtdm.complexity": complexity,
        "ngtdm.strength": strength,
    }
    return feats, degenerate
