"""Affine Kazhdan-Lusztig-Vogan polynomials for symmetric pairs."""

__version__ = "0.1.0"
