"""Matrix-free solvers for the leading eigenpair of a Hermitian operator.

Both solvers see the operator only through ``matvec`` and never exceed
``max_matvecs`` calls, which keeps them inside a lazy operator's budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Matvec = Callable[[np.ndarray], np.ndarray]


@dataclass
class EigResult:
    value: float
    vector: np.ndarray
    residual: float
    matvecs: int
    converged: bool


class NotConverged(RuntimeError):
    def __init__(self, result: EigResult):
        super().__init__(
            f"eigensolver stopped after {result.matvecs} matvecs with residual {result.residual:.3e}"
        )
        self.result = result


def power_iteration(matvec: Matvec, x0: np.ndarray, tol: float = 1e-10,
                    max_matvecs: int = 1000) -> EigResult:
    """Power iteration with a Rayleigh-quotient residual test.

    Converges to the eigenvalue of largest magnitude; for positive
    semidefinite operators that is the largest one.
    """
    x = np.asarray(x0)
    x = x / np.linalg.norm(x)
    lam, res = 0.0, np.inf
    for k in range(1, max_matvecs + 1):
        w = matvec(x)
        lam = float(np.real(np.vdot(x, w)))
        res = float(np.linalg.norm(w - lam * x))
        if res <= tol * abs(lam):
            return EigResult(lam, x, res, k, True)
        nw = np.linalg.norm(w)
        if nw == 0:
            return EigResult(0.0, x, 0.0, k, True)
        x = w / nw
    return EigResult(lam, x, res, max_matvecs, False)


def restarted_krylov(matvec: Matvec, x0: np.ndarray, tol: float = 1e-10,
                     max_matvecs: int = 1000, krylov_dim: int = 80) -> EigResult:
    """Largest eigenpair by Rayleigh-Ritz on a Krylov basis, restarted from the Ritz vector.

    The basis is kept orthonormal by two passes of classical Gram-Schmidt.
    The residual ``||A x - theta x||`` is evaluated from the stored products
    ``A V``, so it costs no extra matvec.
    """
    n = x0.shape[0]
    k_max = max(2, min(int(krylov_dim), n))
    v = np.asarray(x0) / np.linalg.norm(x0)
    used = 0
    theta, x, res = 0.0, v, np.inf
    while used < max_matvecs:
        dtype = np.result_type(v.dtype, np.float64)
        V = np.zeros((k_max, n), dtype=dtype)
        AV = np.zeros((k_max, n), dtype=dtype)
        V[0] = v
        for j in range(k_max):
            AV[j] = matvec(V[j])
            used += 1
            H = V[: j + 1].conj() @ AV[: j + 1].T
            H = (H + H.conj().T) / 2
            evals, evecs = np.linalg.eigh(H)
            theta = float(evals[-1])
            s = evecs[:, -1]
            x = s @ V[: j + 1]
            r = s @ AV[: j + 1] - theta * x
            res = float(np.linalg.norm(r))
            if res <= tol * abs(theta):
                return EigResult(theta, x / np.linalg.norm(x), res, used, True)
            if used >= max_matvecs or j + 1 == k_max:
                break
            w = AV[j].copy()
            for _ in range(2):
                w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
            nw = np.linalg.norm(w)
            if nw <= 1e-14 * np.linalg.norm(AV[j]):
                # invariant subspace: the Ritz pair is exact
                return EigResult(theta, x / np.linalg.norm(x), res, used, res <= tol * abs(theta))
            V[j + 1] = w / nw
        v = x / np.linalg.norm(x)
    return EigResult(theta, x / np.linalg.norm(x), res, used, False)


SOLVERS = {"power": power_iteration, "krylov": restarted_krylov}
