"""Quantitative non-divergence laboratory for unipotent flows on G/Gamma."""

__version__ = "0.1.0"
