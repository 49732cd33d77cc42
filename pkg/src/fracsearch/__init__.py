"""Quantum spatial search and random walks on Sierpinski carpets."""

__version__ = "0.1.0"
