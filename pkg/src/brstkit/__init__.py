"""Exact BRST and Lie algebra cohomology in the small algebra of ghosts and curvatures."""

__version__ = "0.1.0"
