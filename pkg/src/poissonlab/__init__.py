"""Numerical verification of Poisson geometry and Lie groupoid identities."""

__version__ = "0.1.0"
