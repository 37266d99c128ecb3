"""Oriented random walks on the discrete Heisenberg group.

Exact collision statistics for oriented walks, Fourier-side bounds on
the weighted-sum point masses, reference models on the integer lattices,
and percolation / effective-resistance experiments on the oriented
Cayley graph, behind a reproducible command-line harness.
"""

__version__ = "0.1.0"
