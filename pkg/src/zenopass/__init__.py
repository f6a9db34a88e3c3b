"""Zeno-subspace state preparation with rough and Lyapunov-feedback acceleration."""

__version__ = "0.1.0"
