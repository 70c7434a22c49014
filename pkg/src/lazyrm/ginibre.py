"""Lazy Gaussian (Ginibre) matrix revealed one probe at a time.

After ``t`` probes, ``r`` from the right and ``l`` from the left, the
operator holds the representation

    Q = sigma * ( sum_i u_i v_i^*  +  A_L^* Z_l G Z_r A_R ),

where ``A_R = R_r ... R_1`` and ``A_L = L_l ... L_1`` are products of offset
reflectors, ``Z_k`` zeroes the first ``k`` coordinates and ``G`` is a
Gaussian matrix that is never drawn.  Every probe is built so that its input
is annihilated by the unrevealed term, hence the output only involves the
stored basis pairs.  Memory is ``O((m + n) t)`` and probe ``t`` costs
``O((m + n) t)``.
"""

from __future__ import annotations

import numpy as np

from . import faults
from .base import LinearProbeOperator, Side, check_side, check_vector
from .randsrc import RandomSource, as_source
from .reflect import ReflectorChain, make_reflector


class HDGinibre(LinearProbeOperator):
    """Ginibre(m, n) matrix with entrywise standard deviation ``sigma``.

    Parameters
    ----------
    m, n : int
        Matrix shape.
    sigma : float
        Entry scale; ``sigma = 1/sqrt(m)`` gives the usual lasso design.
    source : RandomSource or int, optional
        Randomness; its ``field`` selects real or complex Ginibre.
    tail_tol : float
        Relative threshold below which a reflector tail counts as zero.
    capacity : int, optional
        Expected number of probes; storage for that many is reserved up front.

    At most ``min(m, n)`` probes may be issued in total.
    """

    def __init__(self, m: int, n: int, sigma: float = 1.0,
                 source: RandomSource | int | None = None, tail_tol: float = 0.0,
                 capacity: int | None = None):
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise ValueError(f"dimensions must be positive, got ({m}, {n})")
        if not (np.isfinite(sigma) and sigma > 0):
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.shape = (m, n)
        self.sigma = float(sigma)
        self.source = as_source(source)
        self.dtype = self.source.dtype
        self.tail_tol = float(tail_tol)
        self.budget = min(m, n)
        cap = min(self.budget, 16 if capacity is None else max(1, int(capacity)))
        self.left_chain = ReflectorChain(m, self.dtype, cap)
        self.right_chain = ReflectorChain(n, self.dtype, cap)
        self._U = np.zeros((cap, m), dtype=self.dtype)
        self._V = np.zeros((cap, n), dtype=self.dtype)
        self.r = 0
        self.l = 0

    @property
    def probes(self) -> int:
        return self.r + self.l

    @property
    def remaining(self) -> int:
        return self.budget - self.probes

    def probe_count(self) -> tuple[int, int]:
        """``(right probes, left probes)`` issued so far."""
        return self.r, self.l

    @property
    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Stored pairs as arrays ``U (t, m)`` and ``V (t, n)``; row ``i`` is ``u_i``/``v_i``."""
        t = self.probes
        return self._U[:t], self._V[:t]

    def _store(self, u: np.ndarray, v: np.ndarray) -> None:
        t = self.probes - 1
        if t == self._U.shape[0]:
            cap = min(self.budget, 2 * t)
            self._U = np.concatenate([self._U, np.zeros((cap - t, self.shape[0]), self.dtype)])
            self._V = np.concatenate([self._V, np.zeros((cap - t, self.shape[1]), self.dtype)])
        self._U[t] = u
        self._V[t] = v

    def probe(self, x, side: Side = "right") -> np.ndarray:
        side = check_side(side)
        m, n = self.shape
        x = check_vector(x, n if side == "right" else m)
        self._spend()
        skip = faults.is_active("skip-reflector") and self.probes == 1
        if side == "right":
            g = self.source.normal(m)
            self.r += 1
            p = self.right_chain.apply(x)
            refl = make_reflector(p, self.r, self.tail_tol)
            if not skip:
                self.right_chain.append(refl)
            g[: self.l] = 0
            u = self.left_chain.apply(g, "reverse", "adjoint")
            e = np.zeros(n, dtype=self.dtype)
            e[self.r - 1] = 1
            v = self.right_chain.apply(e, "reverse", "adjoint")
            self._store(u, v)
            U, V = self.basis
            return self.sigma * (U.T @ (V.conj() @ x))
        g = self.source.normal(n)
        self.l += 1
        p = self.left_chain.apply(x)
        refl = make_reflector(p, self.l, self.tail_tol)
        if not skip:
            self.left_chain.append(refl)
        g[: self.r] = 0
        v = self.right_chain.apply(g, "reverse", "adjoint")
        e = np.zeros(m, dtype=self.dtype)
        e[self.l - 1] = 1
        u = self.left_chain.apply(e, "reverse", "adjoint")
        self._store(u, v)
        U, V = self.basis
        return self.sigma * (V.T @ (U.conj() @ x))


def ginibre_new(m: int, n: int, sigma: float = 1.0, src: RandomSource | int | None = None) -> HDGinibre:
    return HDGinibre(m, n, sigma, src)


def ginibre_probe(state: HDGinibre, x, side: Side = "right") -> np.ndarray:
    return state.probe(x, side)


def ginibre_probe_count(state: HDGinibre) -> tuple[int, int]:
    return state.probe_count()
