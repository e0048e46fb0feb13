"""Desk-scale Monte Carlo laboratory for roots of random Kac polynomials near the unit circle."""

__version__ = "0.1.0"
