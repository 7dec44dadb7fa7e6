"""Affine vocal-tract-length normalization: classical and Bayesian estimation."""

__version__ = "0.1.0"
