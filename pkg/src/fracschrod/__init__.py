"""Fundamental solutions, decay estimates and mild solutions of the
semilinear space-time fractional Schrodinger equation."""

__version__ = "0.1.0"
