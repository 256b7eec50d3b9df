"""Numerical laboratory for viscous heating under a divergence-free force."""

__version__ = "0.1.0"
