"""Numerical laboratory for small-scale formation in incompressible fluids."""

__version__ = "0.1.0"
