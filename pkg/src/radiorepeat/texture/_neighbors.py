"""Neighbour offsets and shifted views over a zero-bordered level grid."""

from __future__ import annotations

import itertools

import numpy as np

# 13 unique directions at Chebyshev distance 1: first nonzero component positive
DIRECTIONS_13 = tuple(
    d for d in itertools.product((-1, 0, 1), repeat=3)
    if d != (0, 0, 0) and d[next(i for i in range(3) if d[i] != 0)] > 0
)
OFFSETS_26 = tuple(d for d in itertools.product((-1, 0, 1), repeat=3) if d != (0, 0, 0))


def core(grid: np.ndarray) -> np.ndarray:
    return grid[1:-1, 1:-1, 1:-1]


def shifted(grid: np.ndarray, d) -> np.ndarray:
    """View of ``grid`` aligned so that element k is the neighbour at ``core[k] + d``."""
    nx, ny, nz = grid.shape
    dx, dy, dz = d
    return grid[1 + dx:nx - 1 + dx, 1 + dy:ny - 1 + dy, 1 + dz:nz - 1 + dz]
