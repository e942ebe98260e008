"""Reduction functions and variance-function diagnostics for natural exponential families."""

__version__ = "0.1.0"
