"""Numerical toolkit for the PT-symmetric epsilon-deformation of the KdV equation."""

__version__ = "0.1.0"
