"""Symmetry breaking minima of symmetric tensor decomposition problems."""

__version__ = "0.1.0"
