"""
Revealing a Haar matrix one probe at a time
===========================================

A lazy Haar operator answers each probe with fresh randomness, yet the
answers always fit together into one orthogonal matrix.
"""

import numpy as np

from lazyrm import HDHaar, RandomSource, haar_reconstruct

n = 6
Q = HDHaar(n, RandomSource(seed=3))

# First probe: Q x is a uniformly random vector of norm |x|.
x = np.arange(1.0, n + 1)
y = Q.probe(x, "right")
print("|x| =", np.linalg.norm(x), " |Qx| =", np.linalg.norm(y))

# A left probe that undoes the first one must return x exactly.
print("Q^T (Q x) == x:", np.allclose(Q.probe(y, "left"), x))
print("probes used:", Q.t, "remaining:", Q.remaining)

# Probing e_1..e_n on a fresh state reveals the whole matrix.
M = haar_reconstruct(HDHaar(64, RandomSource(seed=4)))
print("max |M^T M - I| for n=64:", np.abs(M.T @ M - np.eye(64)).max())
print("n * entry variance:", 64 * M.var())
