"""Dual curves, discriminant norms and Kähler energy functionals."""

__version__ = "0.1.0"
