"""Lazy Haar-distributed orthogonal (or unitary) matrix.

After ``t`` probes the operator represents

    Q = A_L^* diag(I_t, Q') A_R,   A_L = L_t ... L_1,  A_R = R_t ... R_1,

with ``Q'`` an unrevealed Haar matrix of size ``n - t``.  Each probe appends
one offset-``t`` reflector to both chains: the one on the probed side is
built from the (transformed) input, the other from a fresh Gaussian vector.
"""

from __future__ import annotations

import numpy as np

from . import faults
from .base import LinearProbeOperator, Side, check_side, check_vector
from .randsrc import RandomSource, as_source
from .reflect import ReflectorChain, apply, make_reflector


class HDHaar(LinearProbeOperator):
    """Haar(n) matrix on the orthogonal group (or unitary group for a complex source).

    At most ``n`` probes may be issued.
    """

    def __init__(self, n: int, source: RandomSource | int | None = None, tail_tol: float = 0.0,
                 capacity: int | None = None):
        n = int(n)
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        self.shape = (n, n)
        self.source = as_source(source)
        self.dtype = self.source.dtype
        self.tail_tol = float(tail_tol)
        cap = min(n, 8 if capacity is None else max(1, int(capacity)))
        self.left_chain = ReflectorChain(n, self.dtype, cap)
        self.right_chain = ReflectorChain(n, self.dtype, cap)
        self.t = 0

    @property
    def n(self) -> int:
        return self.shape[0]

    @property
    def remaining(self) -> int:
        return self.n - self.t

    def probe(self, x, side: Side = "right") -> np.ndarray:
        side = check_side(side)
        x = check_vector(x, self.n)
        self._spend()
        g = self.source.normal(self.n)
        skip = faults.is_active("skip-reflector") and self.t == 1
        self.t += 1
        near, far = (self.right_chain, self.left_chain) if side == "right" else (self.left_chain, self.right_chain)
        p = near.apply(x)
        h_near = make_reflector(p, self.t, self.tail_tol)
        h_far = make_reflector(g, self.t)
        if not skip:
            near.append(h_near)
        far.append(h_far)
        return far.apply(apply(h_near, p), "reverse", "adjoint")

    @property
    def fresh(self) -> bool:
        return self.t == 0


def haar_new(n: int, src: RandomSource | int | None = None) -> HDHaar:
    return HDHaar(n, src)


def haar_probe(state: HDHaar, x, side: Side = "right") -> np.ndarray:
    return state.probe(x, side)


def haar_reconstruct(state: HDHaar) -> np.ndarray:
    """Reveal the full matrix by probing ``e_1, ..., e_n`` from the right.

    Consumes the whole probe budget of a fresh state.
    """
    if not state.fresh:
        raise ValueError("haar_reconstruct needs a fresh (never probed) state")
    n = state.n
    Q = np.empty((n, n), dtype=state.dtype)
    e = np.zeros(n)
    for i in range(n):
        e[:] = 0
        e[i] = 1
        Q[:, i] = state.probe(e, "right")
    return Q
