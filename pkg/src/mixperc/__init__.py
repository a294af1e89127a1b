"""Entanglement percolation with purifiable mixed states."""

__version__ = "0.1.0"
