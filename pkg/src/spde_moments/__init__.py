"""Moments and intermittency exponents of stochastic heat and wave equations."""
__version__ = "0.1.0"
