"""Driver for iterations ``x_{t+1} = f_t(M_t x_t, x_t, ..., x_{t-d})``.

``M_t`` is ``Q`` (a right probe) or ``Q^*`` (a left probe) of any
:class:`~lazyrm.base.LinearProbeOperator`, chosen by an explicit side
schedule.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from ._errors import BudgetExhausted
from .base import LinearProbeOperator, Side, check_side

UpdateMap = Callable[[int, np.ndarray, tuple], np.ndarray]
Schedule = Union[str, Sequence[str], Callable[[int], str]]


class DynamicsError(RuntimeError):
    def __init__(self, msg: str, step: int):
        super().__init__(f"step {step}: {msg}")
        self.step = step


@dataclass
class DynamicsSpec:
    """Everything needed to run the iteration.

    ``initial`` is ``(x_1, x_0, ..., x_{1-d})``, newest first, so the history
    depth is ``d = len(initial) - 1``.  ``update(t, y_t, history)`` receives
    the read-only window ``(x_t, ..., x_{t-d})`` and returns ``x_{t+1}``.
    ``side`` is ``"right"``, ``"left"``, ``"alternate"`` (right on odd
    ``t``), a sequence indexed by ``t - 1``, or a callable of ``t``.
    """

    T: int
    update: UpdateMap
    initial: Sequence[np.ndarray]
    side: Schedule = "right"
    observer: Callable[[int, np.ndarray], None] | None = None
    retain: bool = True

    @property
    def d(self) -> int:
        return len(self.initial) - 1

    def side_at(self, t: int) -> Side:
        s = self.side
        if callable(s):
            return check_side(s(t))
        if isinstance(s, str):
            if s == "alternate":
                return "right" if t % 2 == 1 else "left"
            return check_side(s)
        return check_side(s[t - 1])


@dataclass
class Trajectory:
    """Iterates ``x_1 .. x_{T+1}`` (when retained) and the final window."""

    iterates: list[np.ndarray] | None
    window: tuple[np.ndarray, ...] = field(repr=False)
    steps: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.window[0]


def _frozen(x) -> np.ndarray:
    a = np.asarray(x).view()
    a.flags.writeable = False
    return a


def run(op: LinearProbeOperator, spec: DynamicsSpec) -> Trajectory:
    """Execute ``spec.T`` steps of the dynamics on ``op``."""
    if spec.T < 0:
        raise ValueError("T must be non-negative")
    if not spec.initial:
        raise ValueError("initial history must contain at least x_1")
    rem = op.remaining
    if rem is not None and spec.T > rem:
        raise BudgetExhausted(f"T={spec.T} probes requested but operator allows {rem}")
    window = deque((_frozen(x) for x in spec.initial), maxlen=spec.d + 1)
    if spec.T:
        need = op.input_dim(spec.side_at(1))
        if window[0].shape != (need,):
            raise ValueError(f"x_1 has shape {window[0].shape}, first probe needs ({need},)")
    iterates = [window[0]] if spec.retain else None
    for t in range(1, spec.T + 1):
        try:
            y = op.probe(window[0], spec.side_at(t))
        except BudgetExhausted as exc:
            raise DynamicsError(f"probe budget exhausted ({exc})", t) from exc
        x_next = _frozen(spec.update(t, y, tuple(window)))
        if not np.all(np.isfinite(x_next)):
            raise DynamicsError("non-finite iterate", t)
        window.appendleft(x_next)
        if spec.observer is not None:
            spec.observer(t, x_next)
        if iterates is not None:
            iterates.append(x_next)
    return Trajectory(iterates, tuple(window), spec.T)
