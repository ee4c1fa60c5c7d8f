"""Per-lesion feature extraction: shape, first-order and texture families."""

from __future__ import annotations

from dataclasses import dataclass, field

from .first_order import HIST_BINS, first_order_features
from .quantization import QuantizationSpec, quantize
from .shape import shape_features
from .texture import (build_glcm, build_glzsm, build_ngtdm, glcm_features, glzsm_features,
                      ngtdm_features)
from .volume_io import Mask, Volume, extract_roi


@dataclass
class FeatureVector:
    """Ordered feature-id -> value map with provenance."""

    values: dict[str, float]
    mask_id: str = ""
    quantizations: tuple[QuantizationSpec, ...] = ()
    degenerate: set[str] = field(default_factory=set)

    def __getitem__(self, key: str) -> float:
        return self.values[key]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def texture_features(q) -> tuple[dict[str, float], set[str]]:
    """All GLCM, NGTDM and GLZSM features of a quantized roi (unsuffixed names)."""
    glcm, glcm_flags = glcm_features(build_glcm(q))
    ngtdm, ngtdm_flags = ngtdm_features(build_ngtdm(q))
    glzsm = glzsm_features(build_glzsm(q))
    return {**glcm, **ngtdm, **glzsm}, glcm_flags | ngtdm_flags


def extract_features(volume: Volume, mask: Mask, quantizations, mask_id: str = "",
                     hist_bins: int = HIST_BINS) -> FeatureVector:
    roi = extract_roi(volume, mask)
    values: dict[str, float] = {}
    flags: set[str] = set()

    values.update(shape_features(mask, volume.spacing).as_features())
    fo = first_order_features(roi, hist_bins)
    values.update(fo.as_features())
    if fo.degenerate:
        flags.update({"fo.skewness", "fo.kurtosis", "fo.ch_auc"})

    specs = tuple(quantizations)
    for spec in specs:
        feats, tex_flags = texture_features(quantize(roi, spec))
        values.update({f"{k}@{spec.tag}": v for k, v in feats.items()})
        flags.update(f"{k}@{spec.tag}" for k in tex_flags)
    return FeatureVector(values, mask_id, specs, flags)
