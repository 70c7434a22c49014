"""Householder and unitary reflectors, their offset forms, and chains of them.

A reflector built from ``p`` at (1-based) offset ``k`` is the block matrix
``diag(I_{k-1}, H(p[k-1:]))`` where, for a nonzero vector ``v`` with
``v[0] / ||v|| = r * phase`` (``|phase| = 1``),

    H(v) = -conj(phase) * (I - c * w w^*),   w = v/||v|| + phase * e_1,
    c = 1 / (1 + r).

For real ``v`` the phase is ``sign(v[0])`` with ``sign(0) = +1``, which is the
classical numerically stable Householder reflector.  ``H(v) v = ||v|| e_1``
and ``H(v)^* e_1 = v / ||v||``.  When the tail ``p[k-1:]`` vanishes the
reflector is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Literal

import numba
import numpy as np
from scipy.linalg import norm as _norm

from . import faults

Order = Literal["forward", "reverse"]
Mode = Literal["plain", "adjoint"]


@dataclass(frozen=True)
class Reflector:
    """One generalized reflector acting on coordinates ``k..n`` (1-based).

    ``w`` holds the reflection vector for the tail (length ``n - k + 1``),
    ``c`` the real coefficient of ``w w^*`` and ``s`` the unit-modulus
    leading factor.
    """

    n: int
    k: int
    w: np.ndarray = field(repr=False)
    c: float
    s: complex | float
    identity: bool = False

    @property
    def dtype(self) -> np.dtype:
        return self.w.dtype

    def matrix(self) -> np.ndarray:
        """Dense ``n x n`` matrix of the reflector (testing aid, O(n^2))."""
        return apply_matrix(self, np.eye(self.n, dtype=self.dtype))


def _result_dtype(a: np.dtype, x: np.ndarray) -> np.dtype:
    return np.result_type(a, x.dtype, np.float64)


def make_reflector(p, k: int, tol: float = 0.0) -> Reflector:
    """Construct the offset reflector ``H_k(p)``.

    Parameters
    ----------
    p : array_like, shape (n,)
        Real or complex vector.
    k : int
        1-based offset, ``1 <= k <= n``.
    tol : float
        The tail counts as zero when ``||p[k-1:]|| <= tol * ||p||``.  The
        default (0) only treats an exactly zero tail as degenerate.
    """
    p = np.asarray(p)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a non-empty 1-D vector")
    n = p.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"offset k={k} out of range [1, {n}]")
    if not np.all(np.isfinite(p)):
        raise ValueError("p contains non-finite entries")
    dtype = np.result_type(p.dtype, np.float64)
    tail = np.asarray(p[k - 1:], dtype=dtype)
    big = float(np.max(np.abs(tail)))
    if big == 0.0 or (tol > 0.0 and big * float(_norm(tail / big)) <= tol * float(_norm(p))):
        return Reflector(n, k, np.zeros(n - k + 1, dtype=dtype), 0.0, 1.0, True)

    # H depends only on the direction of the tail; rescaling first keeps
    # the construction free of under/overflow
    w = tail / big
    w /= _norm(w)
    lead = w[0]
    r = abs(lead)
    if np.iscomplexobj(w):
        phase = lead / r if lead != 0 else 1.0 + 0.0j
    else:
        phase = 1.0 if lead >= 0 else -1.0
    w[0] += phase
    s = -np.conj(phase)
    if lead == 0 and faults.is_active("sign-zero"):
        s = -s
    return Reflector(n, k, w, 1.0 / (1.0 + r), s.item() if hasattr(s, "item") else s)


def _check_dim(refl_n: int, x: np.ndarray) -> None:
    if x.ndim < 1 or x.shape[0] != refl_n:
        raise ValueError(f"dimension mismatch: reflector acts on {refl_n}, got shape {x.shape}")


def apply(refl: Reflector, x) -> np.ndarray:
    """Return ``H x`` (new array); coordinates before the offset pass through."""
    x = np.asarray(x)
    _check_dim(refl.n, x)
    y = x.astype(_result_dtype(refl.dtype, x), copy=True)
    if refl.identity:
        return y
    t = y[refl.k - 1:]
    t -= (refl.c * np.vdot(refl.w, t)) * refl.w
    t *= refl.s
    return y


def apply_adjoint(refl: Reflector, x) -> np.ndarray:
    """Return ``H^* x``; identical to :func:`apply` for real reflectors."""
    x = np.asarray(x)
    _check_dim(refl.n, x)
    y = x.astype(_result_dtype(refl.dtype, x), copy=True)
    if refl.identity:
        return y
    t = y[refl.k - 1:]
    t -= (refl.c * np.vdot(refl.w, t)) * refl.w
    t *= np.conj(refl.s)
    return y


def apply_matrix(refl: Reflector, X: np.ndarray) -> np.ndarray:
    """Apply the reflector to every column of ``X``."""
    X = np.asarray(X)
    _check_dim(refl.n, X)
    Y = X.astype(_result_dtype(refl.dtype, X), copy=True)
    if refl.identity:
        return Y
    T = Y[refl.k - 1:]
    T -= refl.c * np.outer(refl.w, refl.w.conj() @ T)
    T *= refl.s
    return Y


def zero_tail_check(refl: Reflector, p, rtol: float = 1e-10) -> bool:
    """True iff ``H_k(p) p`` vanishes beyond coordinate ``k`` (to ``rtol * ||p||``)."""
    p = np.asarray(p)
    y = apply(refl, p)
    return bool(np.all(np.abs(y[refl.k:]) <= rtol * _norm(p)))


@numba.njit(cache=True)
def _chain_kernel(W, c, s, off, count, x, reverse, adjoint):
    n = x.shape[0]
    for jj in range(count):
        j = count - 1 - jj if reverse else jj
        cj = c[j]
        if cj == 0.0:
            continue
        k = off[j]
        row = W[j]
        d = 0.0 * x[0]
        for i in range(k, n):
            d += np.conj(row[i]) * x[i]
        d *= cj
        sj = np.conj(s[j]) if adjoint else s[j]
        for i in range(k, n):
            x[i] = sj * (x[i] - d * row[i])


class ReflectorChain:
    """Append-only ordered product of reflectors sharing one dimension.

    The chain ``[H_1, ..., H_L]`` represents ``A = H_L ... H_1``.  Members are
    packed into a zero-padded ``(capacity, n)`` array so a whole chain is
    applied by one compiled loop.
    """

    def __init__(self, n: int, dtype=np.float64, capacity: int = 8):
        if n < 1:
            raise ValueError("chain dimension must be positive")
        self.n = int(n)
        self.dtype = np.dtype(dtype)
        cap = max(1, int(capacity))
        self._W = np.zeros((cap, self.n), dtype=self.dtype)
        self._c = np.zeros(cap)
        self._s = np.ones(cap, dtype=self.dtype)
        self._off = np.zeros(cap, dtype=np.int64)
        self._len = 0

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, j: int) -> Reflector:
        if j < 0:
            j += self._len
        if not 0 <= j < self._len:
            raise IndexError(j)
        k = int(self._off[j]) + 1
        c = float(self._c[j])
        return Reflector(self.n, k, self._W[j, k - 1:].copy(), c, self._s[j].item(), c == 0.0)

    def __iter__(self) -> Iterator[Reflector]:
        return (self[j] for j in range(self._len))

    def _grow(self) -> None:
        cap = 2 * self._W.shape[0]
        W = np.zeros((cap, self.n), dtype=self.dtype)
        W[: self._len] = self._W[: self._len]
        self._W = W
        self._c = np.concatenate([self._c, np.zeros(cap - self._c.size)])
        self._s = np.concatenate([self._s, np.ones(cap - self._s.size, dtype=self.dtype)])
        self._off = np.concatenate([self._off, np.zeros(cap - self._off.size, dtype=np.int64)])

    def append(self, refl: Reflector) -> None:
        if refl.n != self.n:
            raise ValueError(f"reflector dimension {refl.n} does not match chain dimension {self.n}")
        if np.iscomplexobj(refl.w) and self.dtype.kind != "c":
            raise TypeError("cannot append a complex reflector to a real chain")
        if self._len == self._W.shape[0]:
            self._grow()
        j = self._len
        self._W[j] = 0
        self._W[j, refl.k - 1:] = refl.w
        self._c[j] = 0.0 if refl.identity else refl.c
        self._s[j] = 1.0 if refl.identity else refl.s
        self._off[j] = refl.k - 1
        self._len += 1

    def apply(self, x, order: Order = "forward", mode: Mode = "plain") -> np.ndarray:
        """Apply all members to ``x`` (new array).

        ``order="forward"`` applies the first member first, giving ``A x`` with
        ``mode="plain"``; ``order="reverse", mode="adjoint"`` gives ``A^* x``.
        """
        if order not in ("forward", "reverse"):
            raise ValueError(f"order must be 'forward' or 'reverse', got {order!r}")
        if mode not in ("plain", "adjoint"):
            raise ValueError(f"mode must be 'plain' or 'adjoint', got {mode!r}")
        x = np.asarray(x)
        if x.ndim != 1 or x.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: chain acts on {self.n}, got shape {x.shape}")
        y = np.array(x, dtype=np.result_type(self.dtype, x.dtype, np.float64), copy=True)
        if self._len:
            W, s = self._W, self._s
            if y.dtype != W.dtype:
                W, s = W.astype(y.dtype), s.astype(y.dtype)
            _chain_kernel(W, self._c, s, self._off, self._len, y, order == "reverse", mode == "adjoint")
        return y


def chain_apply(chain: ReflectorChain, x, order: Order = "forward", mode: Mode = "plain") -> np.ndarray:
    return chain.apply(x, order, mode)
