"""The probe-operator contract shared by lazy and dense backends."""

from __future__ import annotations

import abc
from typing import Literal

import numpy as np

from ._errors import BudgetExhausted

Side = Literal["right", "left"]


def check_side(side: str) -> Side:
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    return side  # type: ignore[return-value]


def check_vector(x, length: int, what: str = "x") -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != length:
        raise ValueError(f"{what} must have shape ({length},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} contains non-finite entries")
    return x


class LinearProbeOperator(abc.ABC):
    """A fixed (possibly random, possibly not yet revealed) matrix ``Q``.

    ``probe(x, "right")`` returns ``Q x`` and ``probe(z, "left")`` returns
    ``Q^* z``.  ``shape`` is ``(rows, cols)`` of ``Q``.  ``remaining`` is the
    number of further probes allowed, or ``None`` when unlimited.
    """

    shape: tuple[int, int]
    dtype: np.dtype

    @abc.abstractmethod
    def probe(self, x, side: Side = "right") -> np.ndarray: ...

    @property
    def remaining(self) -> int | None:
        return None

    def input_dim(self, side: Side) -> int:
        return self.shape[1] if check_side(side) == "right" else self.shape[0]

    def output_dim(self, side: Side) -> int:
        return self.shape[0] if check_side(side) == "right" else self.shape[1]

    def matvec(self, x) -> np.ndarray:
        return self.probe(x, "right")

    def rmatvec(self, z) -> np.ndarray:
        return self.probe(z, "left")

    def _spend(self, cost: int = 1) -> None:
        rem = self.remaining
        if rem is not None and rem < cost:
            raise BudgetExhausted(
                f"{type(self).__name__} {self.shape}: probe budget exhausted"
            )


__all__ = ["BudgetExhausted", "LinearProbeOperator", "Side", "check_side", "check_vector"]
