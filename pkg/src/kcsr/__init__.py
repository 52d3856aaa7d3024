"""Kinetically constrained superradiance toolkit."""

__version__ = "0.1.0"
