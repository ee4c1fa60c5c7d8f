"""Radiomics feature extraction and test-retest repeatability analysis."""

__version__ = "0.1.0"
