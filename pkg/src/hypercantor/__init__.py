"""Numerics for hyperbolic Cantor sets: scaling functions, limit sets, scenery."""

__version__ = "0.1.0"
