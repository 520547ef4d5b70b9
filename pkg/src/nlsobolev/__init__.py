"""Numerics for Sobolev spaces built on general nonlocal kernels."""

__version__ = "0.1.0"
