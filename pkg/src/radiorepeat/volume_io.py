"""Volume and mask I/O plus extraction of the masked voxel sample.

Two on-disk formats are supported:

* a minimal NRRD subset (``.nrrd`` attached or ``.nhdr`` detached header,
  raw encoding, little endian, diagonal ``space directions`` or ``spacings``);
* a raw little-endian payload with a JSON sidecar (``.json`` + ``.raw``).

Voxels are stored on disk in x-fastest order. In memory a volume is an array
indexed ``[x, y, z]``.
"""

from __future__ import annotations

import errno
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import EmptyMaskError, GeometryError, VolumeFormatError

Unit = Literal["SUV", "HU", "arbitrary"]
UNITS = ("SUV", "HU", "arbitrary")

_NRRD_TYPES = {
    "uchar": "u1", "unsigned char": "u1", "uint8": "u1", "uint8_t": "u1",
    "signed char": "i1", "int8": "i1", "int8_t": "i1",
    "short": "i2", "short int": "i2", "signed short": "i2",
    "signed short int": "i2", "int16": "i2", "int16_t": "i2",
    "ushort": "u2", "unsigned short": "u2", "unsigned short int": "u2",
    "uint16": "u2", "uint16_t": "u2",
    "float": "f4", "double": "f8",
}
_NRRD_NAMES = {"u1": "uint8", "i1": "int8", "i2": "int16", "u2": "uint16",
               "f4": "float", "f8": "double"}

_SIDECAR_TYPES = {"u8": "u1", "i8": "i1", "i16": "i2", "u16": "u2",
                  "f32": "f4", "f64": "f8"}
_SIDECAR_NAMES = {v: k for k, v in _SIDECAR_TYPES.items()}


@dataclass(frozen=True)
class Volume:
    voxels: np.ndarray  # float64, shape (nx, ny, nz)
    spacing: tuple[float, float, float]
    unit: Unit = "arbitrary"

    def __post_init__(self):
        vox = np.asarray(self.voxels, dtype=np.float64)
        if vox.ndim != 3 or min(vox.shape) < 1:
            raise GeometryError(f"volume must be a non-empty 3D array, got shape {vox.shape}")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or not all(np.isfinite(s) and s > 0 for s in spacing):
            raise GeometryError(f"spacing must be three finite positive numbers, got {self.spacing}")
        if self.unit not in UNITS:
            raise VolumeFormatError(f"unknown unit {self.unit!r}")
        bad = _first_nonfinite(vox)
        if bad is not None:
            raise VolumeFormatError(f"non-finite intensity at voxel {bad}")
        object.__setattr__(self, "voxels", vox)
        object.__setattr__(self, "spacing", spacing)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.voxels.shape)


@dataclass(frozen=True)
class Mask:
    voxels: np.ndarray  # bool, shape (nx, ny, nz)
    spacing: tuple[float, float, float] | None = None

    def __post_init__(self):
        vox = np.asarray(self.voxels) != 0
        if vox.ndim != 3:
            raise GeometryError(f"mask must be 3D, got shape {vox.shape}")
        if not vox.any():
            raise EmptyMaskError("mask has no nonzero voxels")
        object.__setattr__(self, "voxels", vox)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.voxels.shape)

    @property
    def voxel_count(self) -> int:
        return int(np.count_nonzero(self.voxels))


@dataclass(frozen=True)
class RoiSample:
    """Masked voxels in x-fastest scan order."""

    coords: np.ndarray  # int64, shape (N, 3)
    intensities: np.ndarray  # float64, shape (N,)
    spacing: tuple[float, float, float]
    unit: Unit = "arbitrary"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, 3)
        values = np.asarray(self.intensities, dtype=np.float64).ravel()
        if len(coords) == 0 or len(coords) != len(values):
            raise GeometryError("roi needs equal, non-zero numbers of coords and intensities")
        if not np.all(np.isfinite(values)):
            raise VolumeFormatError("roi intensities must be finite")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "intensities", values)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))

    def __len__(self) -> int:
        return len(self.intensities)


def _first_nonfinite(vox: np.ndarray):
    flat = vox.ravel(order="F")
    bad = np.flatnonzero(~np.isfinite(flat))
    if len(bad) == 0:
        return None
    return tuple(int(i) for i in np.unravel_index(bad[0], vox.shape, order="F"))


def _infer_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".nrrd", ".nhdr"):
        return "nrrd"
    if suffix == ".json":
        return "raw_json"
    raise VolumeFormatError(f"cannot infer format from suffix {suffix!r}", str(path))


def _decode(payload: bytes, code: str, dims, path: Path) -> np.ndarray:
    dtype = np.dtype("<" + code)
    expected = int(np.prod(dims)) * dtype.itemsize
    if len(payload) != expected:
        raise VolumeFormatError(
            f"payload has {len(payload)} bytes, header {tuple(dims)} x {dtype.itemsize} "
            f"bytes needs {expected}", str(path))
    flat = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    return flat.reshape(tuple(dims), order="F")


def _read_nrrd(path: Path) -> tuple[np.ndarray, tuple, str]:
    raw = path.read_bytes()
    if not raw.startswith(b"NRRD000"):
        raise VolumeFormatError("missing NRRD magic", str(path))
    sep = raw.find(b"\n\n")
    if sep < 0:
        header_text, payload = raw.decode("latin-1"), b""
    else:
        header_text, payload = raw[:sep].decode("latin-1"), raw[sep + 2:]

    fields: dict[str, str] = {}
    keyvals: dict[str, str] = {}
    for line in header_text.splitlines()[1:]:
        if not line or line.startswith("#"):
            continue
        if ":=" in line:
            k, v = line.split(":=", 1)
            keyvals[k.strip()] = v.strip()
        elif ": " in line:
            k, v = line.split(": ", 1)
            fields[k.strip().lower()] = v.strip()
        else:
            raise VolumeFormatError(f"malformed header line {line!r}", str(path))

    def need(key):
        if key not in fields:
            raise VolumeFormatError(f"header lacks field {key!r}", str(path))
        return fields[key]

    if need("dimension") != "3":
        raise VolumeFormatError("only 3D NRRD is supported", str(path))
    try:
        dims = [int(s) for s in need("sizes").split()]
    except ValueError:
        raise VolumeFormatError("unparseable sizes", str(path)) from None
    if len(dims) != 3 or min(dims) < 1:
        raise VolumeFormatError(f"bad sizes {dims}", str(path))
    type_name = need("type").lower()
    if type_name not in _NRRD_TYPES:
        raise VolumeFormatError(f"unsupported type {type_name!r}", str(path))
    code = _NRRD_TYPES[type_name]
    if need("encoding").lower() != "raw":
        raise VolumeFormatError("only raw encoding is supported", str(path))
    if code[1] != "1" and fields.get("endian", "").lower() != "little":
        raise VolumeFormatError("multi-byte data must declare endian: little", str(path))

    spacing = _nrrd_spacing(fields, path)
    data_file = fields.get("data file") or fields.get("datafile")
    if data_file:
        payload = (path.parent / data_file).read_bytes()
    voxels = _decode(payload, code, dims, path)
    unit = keyvals.get("unit", "arbitrary")
    return voxels, spacing, unit


def _nrrd_spacing(fields: dict, path: Path) -> tuple:
    if "space directions" in fields:
        vecs = []
        for tok in fields["space directions"].replace(" ", "").split(")("):
            tok = tok.strip("()")
            try:
                vecs.append([float(x) for x in tok.split(",")])
            except ValueError:
                raise VolumeFormatError("unparseable space directions", str(path)) from None
        mat = np.array(vecs)
        if mat.shape != (3, 3):
            raise VolumeFormatError("space directions must be three 3-vectors", str(path))
        if np.any(mat[~np.eye(3, dtype=bool)] != 0):
            raise VolumeFormatError("only diagonal space directions are supported", str(path))
        return tuple(float(abs(x)) for x in np.diag(mat))
    if "spacings" in fields:
        try:
            return tuple(float(s) for s in fields["spacings"].split())
        except ValueError:
            raise VolumeFormatError("unparseable spacings", str(path)) from None
    raise VolumeFormatError("header declares neither space directions nor spacings", str(path))


def _read_raw_json(path: Path) -> tuple[np.ndarray, tuple, str]:
    try:
        meta = json.loads(path.read_text())
        dims = [int(n) for n in meta["dims"]]
        spacing = tuple(float(s) for s in meta["spacing_mm"])
        code = _SIDECAR_TYPES[meta["dtype"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise VolumeFormatError(f"malformed sidecar: {exc}", str(path)) from None
    if len(dims) != 3 or min(dims) < 1:
        raise VolumeFormatError(f"bad dims {dims}", str(path))
    data_path = path.parent / meta.get("data_file", path.with_suffix(".raw").name)
    voxels = _decode(data_path.read_bytes(), code, dims, path)
    return voxels, spacing, meta.get("unit", "arbitrary")


def _read_any(path, format: str | None):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    format = format or _infer_format(path)
    if format == "nrrd":
        return _read_nrrd(path)
    if format == "raw_json":
        return _read_raw_json(path)
    raise VolumeFormatError(f"unknown format {format!r}", str(path))


def load_volume(path, format: str | None = None) -> Volume:
    """Read a volume; ``format`` is ``"nrrd"`` or ``"raw_json"`` (inferred from the suffix if omitted)."""
    voxels, spacing, unit = _read_any(path, format)
    bad = _first_nonfinite(voxels)
    if bad is not None:
        raise VolumeFormatError(f"NaN or infinite intensity at voxel {bad}", str(path))
    try:
        return Volume(voxels, spacing, unit)
    except (GeometryError, VolumeFormatError) as exc:
        raise type(exc)(str(exc), str(path)) from None


def load_mask(path, format: str | None = None) -> Mask:
    voxels, spacing, _ = _read_any(path, format)
    try:
        return Mask(voxels, spacing)
    except EmptyMaskError:
        raise EmptyMaskError("mask has no nonzero voxels", str(path)) from None


def _encode(array: np.ndarray, code: str) -> bytes:
    return np.ascontiguousarray(array.ravel(order="F").astype("<" + code)).tobytes()


def save_volume(vol: Volume | Mask, path, format: str | None = None, dtype: str | None = None) -> None:
    """Write a volume or mask; ``dtype`` is a numpy code such as ``"f8"`` or ``"u1"``."""
    path = Path(path)
    format = format or _infer_format(path)
    if isinstance(vol, Mask):
        array, spacing, unit = vol.voxels.astype(np.uint8), vol.spacing or (1.0, 1.0, 1.0), "arbitrary"
        dtype = dtype or "u1"
    else:
        array, spacing, unit = vol.voxels, vol.spacing, vol.unit
        dtype = dtype or "f8"
    dims = array.shape
    if format == "nrrd":
        dirs = " ".join(
            "(" + ",".join(repr(float(spacing[i])) if i == j else "0" for j in range(3)) + ")"
            for i in range(3))
        header = (
            "NRRD0004\n"
            f"type: {_NRRD_NAMES[dtype]}\n"
            "dimension: 3\n"
            f"sizes: {dims[0]} {dims[1]} {dims[2]}\n"
            f"space directions: {dirs}\n"
            "encoding: raw\n"
            "endian: little\n"
            f"unit:={unit}\n\n"
        )
        path.write_bytes(header.encode("ascii") + _encode(array, dtype))
    elif format == "raw_json":
        raw_path = path.with_suffix(".raw")
        meta = {"dims": list(dims), "spacing_mm": [float(s) for s in spacing],
                "dtype": _SIDECAR_NAMES[dtype], "unit": unit, "data_file": raw_path.name}
        raw_path.write_bytes(_encode(array, dtype))
        path.write_text(json.dumps(meta, indent=2) + "\n")
    else:
        raise VolumeFormatError(f"unknown format {format!r}", str(path))


def extract_roi(vol: Volume, mask: Mask) -> RoiSample:
    if vol.dims != mask.dims:
        raise GeometryError(f"volume dims {vol.dims} differ from mask dims {mask.dims}")
    idx = np.flatnonzero(mask.voxels.ravel(order="F"))
    coords = np.column_stack(np.unravel_index(idx, vol.dims, order="F"))
    values = vol.voxels.ravel(order="F")[idx]
    return RoiSample(coords, values, vol.spacing, vol.unit)


def roi_to_mask(roi: RoiSample) -> Mask:
    """Dense mask over the bounding box of ``roi`` (origin shifted to zero)."""
    c = roi.coords - roi.coords.min(axis=0)
    grid = np.zeros(tuple(c.max(axis=0) + 1), dtype=bool)
    grid[c[:, 0], c[:, 1], c[:, 2]] = True
    return Mask(grid, roi.spacing)
