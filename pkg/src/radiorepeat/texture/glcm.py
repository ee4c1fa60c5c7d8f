"""Grey-level co-occurrence matrix merged over the 13 3D directions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMatrixError
from ..quantization import QuantizedRoi
from ._neighbors import DIRECTIONS_13, core, shifted


@dataclass(frozen=True)
class Glcm:
    counts: np.ndarray  # int64 (G, G), symmetric
    n_levels: int

    @property
    def p(self) -> np.ndarray:
        return self.counts / self.counts.sum()


def build_glcm(q: QuantizedRoi) -> Glcm:
    """Symmetric co-occurrence counts at distance 1 over all 13 directions.

    Only pairs with both voxels inside the roi contribute.
    """
    g = q.n_levels
    grid = q.grid()
    centre = core(grid)
    counts = np.zeros(g * g, dtype=np.int64)
    for d in DIRECTIONS_13:
        nb = shifted(grid, d)
        ok = (centre > 0) & (nb > 0)
        counts += np.bincount((centre[ok] - 1) * g + (nb[ok] - 1), minlength=g * g)
    counts = counts.reshape(g, g)
    counts = counts + counts.T
    if counts.sum() == 0:
        raise EmptyMatrixError("roi has no pair of neighbouring voxels; GLCM is empty")
    return Glcm(counts, g)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def glcm_features(glcm: Glcm) -> tuple[dict[str, float], set[str]]:
    """Haralick-type features with levels numbered from 1 and log base 2.

    Returns ``(features, degenerate)`` where ``degenerate`` names features
    whose value is a convention rather than a computed quantity.
    """
    p = glcm.p
    g = glcm.n_levels
    lv = np.arange(1, g + 1, dtype=np.float64)
    i, j = np.meshgrid(lv, lv, indexing="ij")
    px, py = p.sum(axis=1), p.sum(axis=0)
    mu_x, mu_y = float(px @ lv), float(py @ lv)
    sd_x = float(np.sqrt(px @ (lv - mu_x) ** 2))
    sd_y = float(np.sqrt(py @ (lv - mu_y) ** 2))
    degenerate = set()

    # sum (k = i + j, 2..2G) and difference (k = |i - j|, 0..G-1) distributions
    k_sum = np.arange(2, 2 * g + 1, dtype=np.float64)
    p_sum = np.bincount((i + j).astype(np.int64).ravel() - 2, weights=p.ravel(), minlength=2 * g - 1)
    k_diff = np.arange(0, g, dtype=np.float64)
    p_diff = np.bincount(np.abs(i - j).astype(np.int64).ravel(), weights=p.ravel(), minlength=g)

    if sd_x > 0 and sd_y > 0:
        correlation = float((np.sum(i * j * p) - mu_x * mu_y) / (sd_x * sd_y))
    else:
        correlation = 0.0
        degenerate.add("glcm.correlation")

    hxy = _entropy(p)
    hx, hy = _entropy(px), _entropy(py)
    outer = np.outer(px, py)
    nz = (p > 0) & (outer > 0)
    hxy1 = float(-np.sum(p[nz] * np.log2(outer[nz])))
    if max(hx, hy) > 0:
        ic = (hxy - hxy1) / max(hx, hy)
    else:
        ic = 0.0
        degenerate.add("glcm.ic")

    sum_avg = float(k_sum @ p_sum)
    diff_avg = float(k_diff @ p_diff)
    feats = {
        "glcm.asm": float(np.sum(p ** 2)),
        "glcm.contrast": float(np.sum((i - j) ** 2 * p)),
        "glcm.correlation": correlation,
        "glcm.dissimilarity": float(np.sum(np.abs(i - j) * p)),
        "glcm.entropy": hxy,
        "glcm.idm": float(np.sum(p / (1.0 + (i - j) ** 2))),
        "glcm.id": float(np.sum(p / (1.0 + np.abs(i - j)))),
        "glcm.sosv": float(np.sum((i - mu_x) ** 2 * p)),
        "glcm.save": sum_avg,
        "glcm.svar": float(np.sum((k_sum - sum_avg) ** 2 * p_sum)),
        "glcm.sent": _entropy(p_sum),
        "glcm.dvar": float(np.sum((k_diff - diff_avg) ** 2 * p_diff)),
        "glcm.dent": _entropy(p_diff),
        "glcm.ic": float(ic),
        "glcm.cp": float(np.sum((i + j - mu_x - mu_y) ** 4 * p)),
    }
    return feats, degenerate
