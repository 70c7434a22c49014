"""Deliberate defects used as negative controls for the verification harness.

Production code consults :func:`is_active` at the few places a known defect
can be switched on.  Nothing is active unless :func:`inject` is used.

Known faults
------------
``skip-reflector``
    Lazy operators drop the reflector appended by their second probe
    (counters still advance).
``sign-zero``
    The reflector's leading factor uses ``sign(0) = -1`` while its reflection
    vector uses ``sign(0) = +1``, so ``H(v) v = -||v|| e_1`` when ``v_1 == 0``.
``uncorrected-qr``
    The dense Haar sampler returns the raw QR factor without the
    ``diag(sign(R_ii))`` correction.
"""

from __future__ import annotations

import contextlib
from typing import Iterator

FAULTS = ("skip-reflector", "sign-zero", "uncorrected-qr")

_active: set[str] = set()


def is_active(name: str) -> bool:
    return name in _active


@contextlib.contextmanager
def inject(*names: str) -> Iterator[None]:
    """Activate the named faults for the duration of the ``with`` block."""
    for name in names:
        if name not in FAULTS:
            raise ValueError(f"unknown fault {name!r}; choose from {FAULTS}")
    added = [n for n in names if n not in _active]
    _active.update(added)
    try:
        yield
    finally:
        _active.difference_update(added)
