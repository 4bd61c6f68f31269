"""Random triangles of unit area from lognormal models."""

__version__ = "0.1.0"
