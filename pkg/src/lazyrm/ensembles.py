"""Derived lazy ensembles and the dense direct-sampling oracle.

Lazy operators here are compositions of :class:`~lazyrm.ginibre.HDGinibre`
and :class:`~lazyrm.haar.HDHaar`.  :func:`sample_dense` materializes the same
ensembles explicitly; :func:`build_operator` picks either backend from an
:class:`EnsembleSpec`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import faults
from ._errors import OracleCapExceeded
from .base import LinearProbeOperator, Side, check_side, check_vector
from .ginibre import HDGinibre
from .haar import HDHaar
from .randsrc import Field, RandomSource, as_source

ENSEMBLES = ("ginibre", "haar", "goe", "usv", "subsampled-haar")
Ensemble = Literal["ginibre", "haar", "goe", "usv", "subsampled-haar"]
Backend = Literal["hd", "direct"]

CAP_ENV = "LAZYRM_ORACLE_MAX_ENTRIES"
DEFAULT_CAP = 2**24

_SQRT2 = np.sqrt(2.0)


class GOEOperator(LinearProbeOperator):
    """``(Q + Q^*) / sqrt(2)`` for a lazy square Ginibre ``Q`` (GUE if complex).

    Each matvec spends one right and one left probe of the inner operator,
    so at most ``n // 2`` matvecs are available.
    """

    def __init__(self, n: int, source: RandomSource | int | None = None, sigma: float = 1.0,
                 capacity: int | None = None):
        self.inner = HDGinibre(n, n, sigma, source, capacity=None if capacity is None else 2 * capacity)
        self.shape = (n, n)
        self.dtype = self.inner.dtype

    @property
    def remaining(self) -> int:
        return self.inner.remaining // 2

    def probe(self, x, side: Side = "right") -> np.ndarray:
        check_side(side)
        x = check_vector(x, self.shape[0])
        self._spend()
        y_hat = self.inner.probe(x, "right")
        return (self.inner.probe(x, "left") + y_hat) / _SQRT2


class USVOperator(LinearProbeOperator):
    """``U diag(sv) V`` with independent lazy Haar ``U`` (m x m) and ``V`` (n x n).

    ``sv`` holds ``min(m, n)`` singular values; between the two factors the
    vector is zero-padded or truncated to the other dimension.
    """

    def __init__(self, m: int, n: int, singular_values, source: RandomSource | int | None = None,
                 capacity: int | None = None):
        src = as_source(source)
        sv = np.asarray(singular_values, dtype=float)
        if sv.shape != (min(m, n),):
            raise ValueError(f"need {min(m, n)} singular values, got shape {sv.shape}")
        self.sv = sv.copy()
        self.sv.flags.writeable = False
        self.U = HDHaar(m, src.child(0), capacity=capacity)
        self.V = HDHaar(n, src.child(1), capacity=capacity)
        self.shape = (int(m), int(n))
        self.dtype = src.dtype

    @property
    def remaining(self) -> int:
        return min(self.U.remaining, self.V.remaining)

    def _scale(self, z: np.ndarray, out_dim: int) -> np.ndarray:
        k = self.sv.size
        w = np.zeros(out_dim, dtype=z.dtype)
        w[:k] = self.sv * z[:k]
        return w

    def probe(self, x, side: Side = "right") -> np.ndarray:
        side = check_side(side)
        m, n = self.shape
        x = check_vector(x, self.input_dim(side))
        self._spend()
        if side == "right":
            return self.U.probe(self._scale(self.V.probe(x, "right"), m), "right")
        return self.V.probe(self._scale(self.U.probe(x, "left"), n), "left")


class SubsampledHaarOperator(LinearProbeOperator):
    """``A = [I_n 0] Q`` for a lazy Haar ``Q`` of size ``m >= n``; shape ``(n, m)``."""

    def __init__(self, n: int, m: int, source: RandomSource | int | None = None,
                 capacity: int | None = None):
        if not 1 <= n <= m:
            raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
        self.inner = HDHaar(m, source, capacity=capacity)
        self.shape = (int(n), int(m))
        self.dtype = self.inner.dtype

    @property
    def remaining(self) -> int:
        return self.inner.remaining

    def probe(self, x, side: Side = "right") -> np.ndarray:
        side = check_side(side)
        n, m = self.shape
        x = check_vector(x, self.input_dim(side))
        self._spend()
        if side == "right":
            return self.inner.probe(x, "right")[:n]
        z = np.zeros(m, dtype=np.result_type(x.dtype, np.float64))
        z[:n] = x
        return self.inner.probe(z, "left")


class DenseOracleMatrix(LinearProbeOperator):
    """An explicitly stored matrix; probes are ordinary products."""

    def __init__(self, matrix: np.ndarray, label: str):
        matrix = np.array(matrix, copy=True)
        matrix.flags.writeable = False
        self.matrix = matrix
        self.label = label
        self.shape = matrix.shape
        self.dtype = matrix.dtype

    def __repr__(self) -> str:
        return f"DenseOracleMatrix({self.label!r}, shape={self.shape})"

    def probe(self, x, side: Side = "right") -> np.ndarray:
        side = check_side(side)
        x = check_vector(x, self.input_dim(side))
        if side == "right":
            return self.matrix @ x
        return self.matrix.conj().T @ x


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to simulate and at what size.

    ``m, n`` are the matrix rows and columns for ``ginibre`` and ``usv``;
    ``haar`` and ``goe`` use ``n``; ``subsampled-haar`` is ``n x m`` with
    ``n <= m`` (the rows kept from an ``m x m`` Haar matrix).
    """

    kind: Ensemble
    n: int
    m: int | None = None
    sigma: float = 1.0
    singular_values: Sequence[float] | None = field(default=None, compare=False)
    field: Field = "real"

    def __post_init__(self):
        if self.kind not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.kind!r}; choose from {ENSEMBLES}")
        if self.kind in ("ginibre", "usv", "subsampled-haar") and self.m is None:
            raise ValueError(f"ensemble {self.kind!r} needs both m and n")

    @property
    def shape(self) -> tuple[int, int]:
        if self.kind in ("haar", "goe"):
            return (self.n, self.n)
        if self.kind == "subsampled-haar":
            return (self.n, self.m)
        return (self.m, self.n)

    def svals(self) -> np.ndarray:
        k = min(self.shape)
        if self.singular_values is None:
            return np.ones(k)
        return np.asarray(self.singular_values, dtype=float)


def oracle_cap() -> int:
    """Largest number of stored entries the dense oracle may allocate."""
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


def _check_cap(rows: int, cols: int) -> None:
    cap = oracle_cap()
    if rows * cols > cap:
        raise OracleCapExceeded(
            f"dense oracle of shape ({rows}, {cols}) needs {rows * cols} entries, "
            f"above the cap of {cap} (set {CAP_ENV} to raise it)"
        )


def _gaussian(rows: int, cols: int, src: RandomSource) -> np.ndarray:
    return src.normal(rows * cols).reshape(rows, cols)


def dense_haar(n: int, src: RandomSource) -> np.ndarray:
    """Haar orthogonal/unitary matrix via QR of a Gaussian matrix.

    The Q factor is multiplied by the phases of ``diag(R)``; without that
    correction the result is not Haar distributed.
    """
    q, r = np.linalg.qr(_gaussian(n, n, src))
    if faults.is_active("uncorrected-qr"):
        return q
    d = np.diagonal(r)
    ph = d / np.abs(d)
    return q * ph[np.newaxis, :]


def sample_dense(spec: EnsembleSpec, source: RandomSource | int | None = None) -> DenseOracleMatrix:
    """Materialize one draw from the ensemble described by ``spec``."""
    src = as_source(source, spec.field)
    if src.field != spec.field:
        src = RandomSource(src.seed, src.stream, spec.field)
    rows, cols = spec.shape
    if spec.kind == "usv":
        _check_cap(max(rows, cols), max(rows, cols))
    elif spec.kind == "subsampled-haar":
        _check_cap(cols, cols)
    else:
        _check_cap(rows, cols)

    if spec.kind == "ginibre":
        M = spec.sigma * _gaussian(rows, cols, src)
    elif spec.kind == "haar":
        M = dense_haar(spec.n, src)
    elif spec.kind == "goe":
        G = spec.sigma * _gaussian(spec.n, spec.n, src)
        M = (G + G.conj().T) / _SQRT2
    elif spec.kind == "subsampled-haar":
        M = dense_haar(spec.m, src)[: spec.n]
    else:
        U = dense_haar(rows, src.child(0))
        V = dense_haar(cols, src.child(1))
        S = np.zeros((rows, cols))
        k = min(rows, cols)
        S[np.arange(k), np.arange(k)] = spec.svals()
        M = U @ S @ V
    return DenseOracleMatrix(M, spec.kind)


def make_lazy(spec: EnsembleSpec, source: RandomSource | int | None = None,
              capacity: int | None = None) -> LinearProbeOperator:
    """Lazy (matrix-free) operator for ``spec``; ``capacity`` reserves storage for that many probes."""
    src = as_source(source, spec.field)
    if src.field != spec.field:
        src = RandomSource(src.seed, src.stream, spec.field)
    if spec.kind == "ginibre":
        return HDGinibre(spec.m, spec.n, spec.sigma, src, capacity=capacity)
    if spec.kind == "haar":
        return HDHaar(spec.n, src, capacity=capacity)
    if spec.kind == "goe":
        return GOEOperator(spec.n, src, spec.sigma, capacity=capacity)
    if spec.kind == "subsampled-haar":
        return SubsampledHaarOperator(spec.n, spec.m, src, capacity=capacity)
    return USVOperator(spec.m, spec.n, spec.svals(), src, capacity=capacity)


def build_operator(spec: EnsembleSpec, backend: Backend,
                   source: RandomSource | int | None = None,
                   capacity: int | None = None) -> LinearProbeOperator:
    if backend == "hd":
        return make_lazy(spec, source, capacity)
    if backend == "direct":
        return sample_dense(spec, source)
    raise ValueError(f"backend must be 'hd' or 'direct', got {backend!r}")


def goe_probe(op: GOEOperator, x) -> np.ndarray:
    return op.probe(x)


def usv_probe(op: USVOperator, x, side: Side = "right") -> np.ndarray:
    return op.probe(x, side)


def subsampled_probe(op: SubsampledHaarOperator, x, side: Side = "right") -> np.ndarray:
    return op.probe(x, side)
