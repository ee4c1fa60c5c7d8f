"""Brute-force reference implementations used only by the tests.

Plain Python loops over coordinates; deliberately share no code with the
vectorized builders they check.
"""

from __future__ import annotations

import math
from collections import deque
from itertools import product

import numpy as np

NEIGHBOURS = [d for d in product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]


def _level_map(coords, levels):
    return {tuple(int(v) for v in c): int(lv) for c, lv in zip(coords, levels)}


def glcm_counts(coords, levels, n_levels):
    """Every ordered pair of 26-neighbours counted once per order == symmetric 13-direction counts."""
    lm = _level_map(coords, levels)
    counts = np.zeros((n_levels, n_levels), dtype=np.int64)
    for (x, y, z), a in lm.items():
        for dx, dy, dz in NEIGHBOURS:
            b = lm.get((x + dx, y + dy, z + dz))
            if b is not None:
                counts[a - 1, b - 1] += 1
    return counts


def ngtdm_sn(coords, levels, n_levels):
    lm = _level_map(coords, levels)
    devs = {k: [] for k in range(1, n_levels + 1)}
    n = [0] * n_levels
    for (x, y, z), a in lm.items():
        nb = [lm[p] for p in ((x + dx, y + dy, z + dz) for dx, dy, dz in NEIGHBOURS) if p in lm]
        if not nb:
            continue
        total = 0
        for v in nb:
            total += v
        devs[a].append(abs(a - total / len(nb)))
        n[a - 1] += 1
    s = [math.fsum(devs[k]) for k in range(1, n_levels + 1)]
    return np.array(s), np.array(n, dtype=np.int64)


def flood_fill_zones(coords, levels):
    """Sorted (level, size) list of 26-connected equal-level zones via BFS."""
    lm = _level_map(coords, levels)
    seen = set()
    zones = []
    for start, level in lm.items():
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        size = 0
        while queue:
            x, y, z = queue.popleft()
            size += 1
            for dx, dy, dz in NEIGHBOURS:
                p = (x + dx, y + dy, z + dz)
                if p not in seen and lm.get(p) == level:
                    seen.add(p)
                    queue.append(p)
        zones.append((level, size))
    return sorted(zones)


def zone_matrix(zones, n_levels):
    max_size = max(s for _, s in zones)
    z = np.zeros((n_levels, max_size), dtype=np.int64)
    for level, size in zones:
        z[level - 1, size - 1] += 1
    return z


def ngtdm_reference_features(s, n, eps=1e-6):
    """Amadasun-King formulas by explicit double loops."""
    n_vp = sum(n)
    levels = [k + 1 for k in range(len(n)) if n[k] > 0]
    p = {k: n[k - 1] / n_vp for k in levels}
    ss = {k: s[k - 1] for k in levels}
    ps = sum(p[k] * ss[k] for k in levels)
    coarse = min(1e6, 1.0 / (eps + ps))
    g = len(levels)
    if g > 1:
        num = sum(p[a] * p[b] * (a - b) ** 2 for a in levels for b in levels)
        contrast = num / (g * (g - 1)) * sum(ss.values()) / n_vp
    else:
        contrast = 0.0
    den = sum(abs(a * p[a] - b * p[b]) for a in levels for b in levels)
    busy = ps / den if den > 0 else 0.0
    comp = sum(abs(a - b) * (p[a] * ss[a] + p[b] * ss[b]) / (p[a] + p[b])
               for a in levels for b in levels) / n_vp
    stot = sum(ss.values())
    strength = (sum((p[a] + p[b]) * (a - b) ** 2 for a in levels for b in levels) / stot
                if stot > 0 else 0.0)
    return {"coarseness": coarse, "contrast": contrast, "busyness": busy,
            "complexity": comp, "strength": strength}


def average_ranks(x):
    """Rank = 1 + #smaller + (#equal - 1) / 2, by pairwise counting."""
    return [1 + sum(v < xi for v in x) + (sum(v == xi for v in x) - 1) / 2 for xi in x]


def pearson(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    sab = sum((u - ma) * (v - mb) for u, v in zip(a, b))
    saa = sum((u - ma) ** 2 for u in a)
    sbb = sum((v - mb) ** 2 for v in b)
    return sab / math.sqrt(saa * sbb)


def spearman_bruteforce(x, y):
    return pearson(average_ranks(list(x)), average_ranks(list(y)))


def icc21_bruteforce(table):
    """ICC(2,1) from an explicit two-way ANOVA decomposition."""
    rows = [list(map(float, r)) for r in table]
    n, k = len(rows), len(rows[0])
    grand = sum(sum(r) for r in rows) / (n * k)
    row_means = [sum(r) / k for r in rows]
    col_means = [sum(rows[i][j] for i in range(n)) / n for j in range(k)]
    ssr = k * sum((m - grand) ** 2 for m in row_means)
    ssc = n * sum((m - grand) ** 2 for m in col_means)
    sse = sum((rows[i][j] - row_means[i] - col_means[j] + grand) ** 2
              for i in range(n) for j in range(k))
    msr, msc, mse = ssr / (n - 1), ssc / (k - 1), sse / ((n - 1) * (k - 1))
    return (msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n)


def random_roi(rng, max_side=6, max_levels=8):
    """Random (coords, levels, n_levels) with at least one voxel."""
    dims = rng.integers(1, max_side + 1, size=3)
    density = rng.uniform(0.2, 1.0)
    mask = rng.random(tuple(dims)) < density
    if not mask.any():
        mask[tuple(rng.integers(0, d) for d in dims)] = True
    coords = np.argwhere(mask)
    g = int(rng.integers(1, max_levels + 1))
    levels = rng.integers(1, g + 1, size=len(coords))
    return coords, levels, g
