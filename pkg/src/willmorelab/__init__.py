"""Numerical laboratory for conformal surface geometry in the light-cone model."""

__version__ = "0.1.0"
