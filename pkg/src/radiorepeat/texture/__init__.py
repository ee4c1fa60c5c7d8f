"""Texture matrices (GLCM, NGTDM, GLZSM) and their features."""

from .glcm import Glcm, build_glcm, glcm_features
from .glzsm import Glzsm, build_glzsm, glzsm_features
from .ngtdm import Ngtdm, build_ngtdm, ngtdm_features

__all__ = [
    "Glcm", "build_glcm", "glcm_features",
    "Ngtdm", "build_ngtdm", "ngtdm_features",
    "Glzsm", "build_glzsm", "glzsm_features",
]
