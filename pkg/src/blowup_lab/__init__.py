"""Numerical laboratory for test-function blow-up arguments in hyperbolic systems."""

__version__ = "0.1.0"
