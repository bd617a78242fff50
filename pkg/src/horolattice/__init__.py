"""Desk-scale computations for expanding horospherical translates of affine lattices."""

__version__ = "0.1.0"
