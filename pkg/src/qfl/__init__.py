"""Exact and certified computations for the quadratic family f(z, lam) = (z^2 + lam, lam)."""
from qfl.bipoly import BiPoly, Degrees, parse_poly, format_poly

__version__ = "0.1.0"

__all__ = ["BiPoly", "Degrees", "parse_poly", "format_poly"]
