"""Synthetic test-retest lesions.

Each phantom is a shared smooth texture inside a ball, ellipsoid or blob mask,
plus two independent white-noise realizations (test and retest). Masks are
identical across the pair.

Random streams: ``numpy.random.SeedSequence(seed).spawn(4)`` gives four child
sequences, each driving a ``PCG64`` generator, used in this order for
(blob geometry, texture field, test noise, retest noise). All draws are
standard normals in C order over the full grid, so a spec fully determines
the output bytes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import ndimage

from .errors import GeometryError, InputError
from .volume_io import Mask, Volume

ELLIPSOID_AXES = (1.0, 0.75, 0.6)
BLOB_AMPLITUDE = 0.3


@dataclass(frozen=True)
class PhantomSpec:
    dims: tuple[int, int, int] = (40, 40, 40)
    spacing: tuple[float, float, float] = (4.0, 4.0, 4.0)
    shape: Literal["ball", "ellipsoid", "blob"] = "ball"
    radius_vox: float = 12.0
    base_intensity: float = 8.0
    texture_scale: float = 2.0
    texture_contrast: float = 0.3
    noise_sd: float = 0.5
    background: float = 1.0
    seed: int = 0
    unit: str = "SUV"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise GeometryError(f"bad dims {self.dims}")
        if self.shape not in ("ball", "ellipsoid", "blob"):
            raise InputError(f"unknown phantom shape {self.shape!r}")
        if not self.radius_vox > 0:
            raise GeometryError("radius must be positive")
        reach = self.radius_vox * (1 + BLOB_AMPLITUDE if self.shape == "blob" else 1.0)
        if 2 * reach + 1 > min(self.dims):
            raise GeometryError(f"radius {self.radius_vox} does not fit inside dims {self.dims}")
        if self.noise_sd < 0 or self.texture_scale < 0:
            raise InputError("noise_sd and texture_scale must be non-negative")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PhantomSpec":
        data = json.loads(text)
        try:
            return cls(**data)
        except TypeError as exc:
            raise InputError(f"invalid phantom spec: {exc}") from None


@dataclass(frozen=True)
class PhantomPair:
    test: Volume
    retest: Volume
    mask: Mask
    spec: PhantomSpec = field(compare=False)


def _radial_grid(dims) -> np.ndarray:
    centre = (np.asarray(dims, dtype=np.float64) - 1.0) / 2.0
    return np.indices(dims, dtype=np.float64) - centre[:, None, None, None]


def _mask(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    x = _radial_grid(spec.dims)
    r = spec.radius_vox
    if spec.shape == "ball":
        return np.sum(x ** 2, axis=0) <= r * r
    if spec.shape == "ellipsoid":
        axes = np.asarray(ELLIPSOID_AXES)[:, None, None, None] * r
        return np.sum((x / axes) ** 2, axis=0) <= 1.0
    # blob: ball whose radius is modulated by a smooth field on the grid
    bump = ndimage.gaussian_filter(rng.standard_normal(spec.dims), sigma=max(r / 2.0, 1.0), mode="wrap")
    bump /= max(np.abs(bump).max(), 1e-12)
    inside = np.sqrt(np.sum(x ** 2, axis=0)) <= r * (1.0 + BLOB_AMPLITUDE * bump)
    labels, n = ndimage.label(inside, structure=np.ones((3, 3, 3), dtype=bool))
    if n == 0:
        raise GeometryError("blob mask came out empty")
    largest = np.argmax(np.bincount(labels.ravel())[1:]) + 1
    return labels == largest


def generate_pair(spec: PhantomSpec) -> PhantomPair:
    geom, tex, noise_a, noise_b = (np.random.Generator(np.random.PCG64(s))
                                   for s in np.random.SeedSequence(spec.seed).spawn(4))
    mask = _mask(spec, geom)
    if not mask.any():
        raise GeometryError("phantom mask is empty")

    field_ = tex.standard_normal(spec.dims)
    if spec.texture_scale > 0:
        field_ = ndimage.gaussian_filter(field_, sigma=spec.texture_scale, mode="wrap")
    field_ = (field_ - field_.mean()) / max(field_.std(), 1e-12)
    clean = np.where(mask, spec.base_intensity * (1.0 + spec.texture_contrast * field_), spec.background)

    test = clean + spec.noise_sd * noise_a.standard_normal(spec.dims)
    retest = clean + spec.noise_sd * noise_b.standard_normal(spec.dims)
    return PhantomPair(
        test=Volume(test, spec.spacing, spec.unit),
        retest=Volume(retest, spec.spacing, spec.unit),
        mask=Mask(mask, spec.spacing),
        spec=spec,
    )


def write_pair(pair: PhantomPair, out_dir, prefix: str = "phantom", format: str = "nrrd") -> dict[str, Path]:
    """Write test/retest volume and mask files plus the spec JSON; returns the paths."""
    from .volume_io import save_volume

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = ".nrrd" if format == "nrrd" else ".json"
    paths = {
        "test_volume": out_dir / f"{prefix}_test_volume{ext}",
        "test_mask": out_dir / f"{prefix}_test_mask{ext}",
        "retest_volume": out_dir / f"{prefix}_retest_volume{ext}",
        "retest_mask": out_dir / f"{prefix}_retest_mask{ext}",
    }
    save_volume(pair.test, paths["test_volume"], format)
    save_volume(pair.mask, paths["test_mask"], format)
    save_volume(pair.retest, paths["retest_volume"], format)
    save_volume(pair.mask, paths["retest_mask"], format)
    spec_path = out_dir / f"{prefix}_spec.json"
    spec_path.write_text(pair.spec.to_json())
    paths["spec"] = spec_path
    return paths
