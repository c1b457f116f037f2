"""Exact decision procedures for rough ideal convergence in probability."""

__version__ = "1.0.0"
