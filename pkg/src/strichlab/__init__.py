"""Numerical laboratory for Strichartz estimates of radial dispersive equations."""

__version__ = "0.1.0"
