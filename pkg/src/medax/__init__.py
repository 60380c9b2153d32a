"""Medial axes of planar closed sets and their stability under C^{1,1} diffeomorphisms."""

__version__ = "0.1.0"
