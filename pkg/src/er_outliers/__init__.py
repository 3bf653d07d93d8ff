"""Extremal eigenvalues of sparse Erdős–Rényi adjacency matrices and sparse Wigner matrices."""

__version__ = "0.1.0"
