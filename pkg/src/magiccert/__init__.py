"""Certified search for separating polynomials of magic unitaries."""

__version__ = "0.1.0"
FORMAT_VERSION = "1"
