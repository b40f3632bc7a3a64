"""Exact DoS-detectability analysis for arbitrarily varying channels."""

__version__ = "0.1.0"
