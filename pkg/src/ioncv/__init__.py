"""Continuous-variable gate simulator and pulse compiler for a trapped ion."""

__version__ = "0.1.0"
