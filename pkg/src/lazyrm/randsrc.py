"""Seedable normal-variate sources with named, independent streams.

Every random draw in the package goes through a :class:`RandomSource`.  A
source is identified by ``(seed, stream)``; the stream is a tuple of
non-negative integers passed to :class:`numpy.random.SeedSequence` as its
``spawn_key``, so distinct streams give statistically independent PCG64DXSM
generators (128-bit state, jumpable).  Within one source, the sequence
of requests fully determines the sequence of outputs.

Complex standard normals are ``(a + 1j*b) / sqrt(2)`` with ``a, b`` i.i.d.
``N(0, 1)``, i.e. unit total variance ``E|z|^2 = 1``.
"""

from __future__ import annotations

from typing import Literal, Sequence, Union

import numpy as np

Field = Literal["real", "complex"]
StreamKey = Union[int, Sequence[int]]

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _as_key(stream: StreamKey) -> tuple[int, ...]:
    key = (stream,) if isinstance(stream, (int, np.integer)) else tuple(stream)
    for k in key:
        if int(k) < 0:
            raise ValueError(f"stream components must be non-negative, got {stream!r}")
    return tuple(int(k) for k in key)


class RandomSource:
    """Reproducible source of real or complex standard normal variates.

    Parameters
    ----------
    seed : int
        Non-negative integer below ``2**64``.
    stream : int or sequence of int
        Stream identifier.  Sources with the same seed and different streams
        are independent.
    field : {"real", "complex"}
        Scalar field of the vectors returned by :meth:`normal`.
    """

    def __init__(self, seed: int = 0, stream: StreamKey = 0, field: Field = "real"):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be in [0, 2**64), got {seed}")
        if field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
        self.seed = seed
        self.stream = _as_key(stream)
        self.field: Field = field
        ss = np.random.SeedSequence(seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.PCG64DXSM(ss))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={self.stream}, field={self.field!r})"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.complex128 if self.field == "complex" else np.float64)

    @property
    def generator(self) -> np.random.Generator:
        """The underlying generator, for draws other than standard normals."""
        return self._gen

    def child(self, *keys: int, field: Field | None = None) -> "RandomSource":
        """Source on the sub-stream ``self.stream + keys`` (same seed)."""
        return RandomSource(self.seed, self.stream + _as_key(keys), field or self.field)

    def normal(self, length: int) -> np.ndarray:
        """Draw ``length`` i.i.d. standard normals in this source's field."""
        length = int(length)
        if length < 1:
            raise ValueError(f"length must be positive, got {length}")
        if self.field == "real":
            return self._gen.standard_normal(length)
        z = self._gen.standard_normal(2 * length).view(np.complex128)
        z *= _INV_SQRT2
        return z


def normal_vector(src: RandomSource, length: int) -> np.ndarray:
    """Functional alias of :meth:`RandomSource.normal`."""
    return src.normal(length)


def as_source(src: RandomSource | int | None, field: Field = "real") -> RandomSource:
    """Coerce a seed (or ``None`` for seed 0) to a :class:`RandomSource`."""
    if isinstance(src, RandomSource):
        return src
    return RandomSource(0 if src is None else int(src), field=field)
