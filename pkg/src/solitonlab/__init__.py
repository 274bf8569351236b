"""Numerical laboratory for steady gradient Ricci soliton geometry."""

__version__ = "0.1.0"
