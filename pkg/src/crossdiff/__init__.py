"""Entropy structure analysis for cross-diffusion systems."""

__version__ = "0.1.0"
