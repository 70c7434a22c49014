"""Lasso/ISTA on a random design and the spectral estimator on a subsampled Haar design.

Both experiments run against either backend (``"hd"`` lazy operators or
``"direct"`` dense matrices).  Trial ``i`` of backend ``b`` draws its data
from stream ``(b, i, 0)`` and its matrix from stream ``(b, i, 1)`` of the
configured seed, with ``b = 0`` for hd and ``b = 1`` for direct, so the two
backends are statistically independent and every trial is reproducible on
its own.
"""

from __future__ import annotations

import concurrent.futures as cf
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Literal

import numpy as np

from ._errors import BudgetExhausted
from .dynamics import DynamicsSpec, run
from .eigen import SOLVERS, EigResult, NotConverged
from .ensembles import Backend, EnsembleSpec, build_operator
from .randsrc import RandomSource

BACKEND_CODE = {"hd": 0, "direct": 1}


def trial_sources(seed: int, backend: Backend, trial: int) -> tuple[RandomSource, RandomSource]:
    """``(data, matrix)`` sources for one trial."""
    b = BACKEND_CODE[backend]
    return RandomSource(seed, (b, trial, 0)), RandomSource(seed, (b, trial, 1))


def sample_bernoulli_gaussian(n: int, rho: float, sigma_s: float, src: RandomSource) -> np.ndarray:
    """Entries are 0 with probability ``rho``, otherwise ``N(0, sigma_s**2)``."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    zero = src.generator.random(n) < rho
    beta = sigma_s * src.normal(n)
    beta[zero] = 0.0
    return beta


def soft_threshold(x, theta: float) -> np.ndarray:
    """``sign(x) * max(|x| - theta, 0)`` elementwise."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - theta, 0.0)


def _map_trials(fn, trials: int, threads: int) -> list:
    if threads <= 1 or trials <= 1:
        return [fn(i) for i in range(trials)]
    with cf.ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(trials), chunksize=max(1, trials // (4 * threads))))


def _mean_stderr(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = samples.shape[0]
    mean = samples.mean(axis=0)
    if k < 2:
        return mean, np.full_like(mean, np.nan)
    return mean, samples.std(axis=0, ddof=1) / np.sqrt(k)


# --------------------------------------------------------------------- ISTA


@dataclass(frozen=True)
class IstaConfig:
    """Lasso/ISTA experiment.  Defaults follow the reference setup (T=50, lambda=2, ...).

    ``m`` defaults to ``n // 2``.  ``ensemble="ginibre"`` uses i.i.d.
    ``N(0, 1/m)`` entries; ``"haar"`` uses an ``n x n`` Haar matrix.
    """

    n: int = 256
    m: int | None = None
    T: int = 50
    lam: float = 2.0
    tau: float = 0.3
    rho: float = 0.2
    sigma_s: float = 2.0
    sigma_w: float = 0.1
    trials: int = 1
    seed: int = 0
    ensemble: Literal["ginibre", "haar"] = "ginibre"

    def __post_init__(self):
        if min(self.lam, self.tau, self.sigma_s) <= 0 or self.sigma_w < 0:
            raise ValueError("lam, tau, sigma_s must be positive and sigma_w non-negative")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.ensemble not in ("ginibre", "haar"):
            raise ValueError(f"ISTA supports ginibre or haar designs, got {self.ensemble!r}")

    @property
    def rows(self) -> int:
        if self.ensemble == "haar":
            return self.n
        return self.n // 2 if self.m is None else int(self.m)

    @property
    def probes(self) -> int:
        """Probes per trial: one for the observations, two per ISTA step."""
        return 2 * self.T + 1

    def design(self) -> EnsembleSpec:
        if self.ensemble == "haar":
            return EnsembleSpec("haar", self.n)
        m = self.rows
        return EnsembleSpec("ginibre", self.n, m, sigma=1.0 / np.sqrt(m))


@dataclass
class IstaTrial:
    mse: np.ndarray  # e^(0..T)
    x_final: np.ndarray
    beta: np.ndarray


def ista_trial(cfg: IstaConfig, backend: Backend, trial: int) -> IstaTrial:
    """One ISTA run from ``x_0 = 0``; each step is a right then a left probe."""
    data_src, mat_src = trial_sources(cfg.seed, backend, trial)
    spec = cfg.design()
    if backend == "hd" and cfg.probes > min(spec.shape):
        raise BudgetExhausted(
            f"ISTA with T={cfg.T} needs {cfg.probes} probes; HD {spec.kind} {spec.shape} allows {min(spec.shape)}"
        )
    Q = build_operator(spec, backend, mat_src, capacity=cfg.probes)
    n, m = cfg.n, cfg.rows
    beta = sample_bernoulli_gaussian(n, cfg.rho, cfg.sigma_s, data_src)
    y_obs = Q.probe(beta, "right") + cfg.sigma_w * data_src.normal(m)
    theta = cfg.lam * cfg.tau
    mse = np.empty(cfg.T + 1)
    mse[0] = beta @ beta / n

    def update(t, y, hist):
        if t % 2 == 1:
            return y_obs - y
        x_next = soft_threshold(hist[1] + cfg.tau * y, theta)
        mse[t // 2] = np.sum((x_next - beta) ** 2) / n
        return x_next

    x0 = np.zeros(n)
    traj = run(Q, DynamicsSpec(2 * cfg.T, update, (x0, x0), side="alternate", retain=False))
    return IstaTrial(mse, np.array(traj.final if cfg.T else x0), beta)


@dataclass
class IstaResult:
    config: IstaConfig
    backend: str
    mse_mean: np.ndarray
    mse_stderr: np.ndarray
    final_mse: np.ndarray = field(repr=False)


def _ista_mse(cfg, backend, i):
    return ista_trial(cfg, backend, i).mse


def ista_run(cfg: IstaConfig, backend: Backend = "hd", threads: int = 1) -> IstaResult:
    """Trial-averaged MSE curve ``e^(t)``, ``t = 0..T``."""
    if cfg.trials < 1:
        raise ValueError("trials must be positive")
    rows = np.array(_map_trials(partial(_ista_mse, cfg, backend), cfg.trials, threads))
    mean, se = _mean_stderr(rows)
    return IstaResult(cfg, backend, mean, se, rows[:, -1])


# ----------------------------------------------------------------- spectral


@dataclass(frozen=True)
class SpectralConfig:
    """Spectral estimator with ``y_i = tanh(|a_i^T xi|)`` and ``m = floor(alpha n)``.

    The planted ``xi`` is uniform on the sphere of radius ``sqrt(m)``, so
    every ``a_i^T xi`` has unit variance.  ``max_matvecs=None`` uses the
    whole lazy budget ``(m - 1) // 2`` on both backends.
    """

    n: int = 256
    alpha: float = 2.0
    eigensolver: Literal["power", "krylov"] = "krylov"
    max_matvecs: int | None = None
    tol: float = 1e-10
    krylov_dim: int = 80
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.eigensolver not in SOLVERS:
            raise ValueError(f"eigensolver must be one of {tuple(SOLVERS)}")

    @property
    def m(self) -> int:
        return int(np.floor(self.alpha * self.n))

    @property
    def matvec_budget(self) -> int:
        return (self.m - 1) // 2 if self.max_matvecs is None else int(self.max_matvecs)


def measure(z: np.ndarray) -> np.ndarray:
    return np.tanh(np.abs(z))


@dataclass
class SpectralProblem:
    """The implicit ``D v = (1/m) A (y * (A^T v))`` for one trial."""

    A: object
    xi: np.ndarray
    y: np.ndarray
    m: int

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.A.probe((self.y / self.m) * self.A.probe(v, "left"), "right")

    def dense(self) -> np.ndarray:
        """Materialized ``D`` (direct backend only)."""
        M = self.A.matrix
        return (M * self.y) @ M.conj().T / self.m


def spectral_problem(cfg: SpectralConfig, backend: Backend, trial: int) -> SpectralProblem:
    data_src, mat_src = trial_sources(cfg.seed, backend, trial)
    n, m = cfg.n, cfg.m
    if backend == "hd" and 2 * cfg.matvec_budget + 1 > m:
        raise BudgetExhausted(f"{cfg.matvec_budget} matvecs need {2 * cfg.matvec_budget + 1} probes; Haar({m}) allows {m}")
    A = build_operator(EnsembleSpec("subsampled-haar", n, m), backend, mat_src,
                       capacity=2 * cfg.matvec_budget + 1)
    g = data_src.normal(n)
    xi = np.sqrt(m) * g / np.linalg.norm(g)
    y = measure(A.probe(xi, "left"))
    return SpectralProblem(A, xi, y, m)


def cosine2(xi: np.ndarray, x: np.ndarray) -> float:
    """Squared cosine similarity ``(xi^T x)^2 / (|xi|^2 |x|^2)``."""
    return float(np.abs(np.vdot(xi, x)) ** 2 / (np.vdot(xi, xi).real * np.vdot(x, x).real))


def solve_spectral(cfg: SpectralConfig, prob: SpectralProblem, x0: np.ndarray) -> EigResult:
    solver = SOLVERS[cfg.eigensolver]
    kw = {"krylov_dim": cfg.krylov_dim} if cfg.eigensolver == "krylov" else {}
    return solver(prob.matvec, x0, tol=cfg.tol, max_matvecs=cfg.matvec_budget, **kw)


@dataclass
class SpectralTrial:
    lam_max: float
    rho: float
    residual: float
    matvecs: int


def spectral_trial(cfg: SpectralConfig, backend: Backend, trial: int) -> SpectralTrial:
    """Leading eigenpair of the implicit ``D``; raises :class:`NotConverged`."""
    prob = spectral_problem(cfg, backend, trial)
    start = trial_sources(cfg.seed, backend, trial)[0].child(1).normal(cfg.n)
    res = solve_spectral(cfg, prob, start)
    if not res.converged:
        raise NotConverged(res)
    return SpectralTrial(res.value, cosine2(prob.xi, res.vector), res.residual, res.matvecs)


@dataclass
class SpectralResult:
    config: SpectralConfig
    backend: str
    lam_max: np.ndarray
    rho: np.ndarray

    @property
    def rho_mean(self) -> float:
        return float(self.rho.mean())

    @property
    def rho_stderr(self) -> float:
        k = self.rho.size
        return float(self.rho.std(ddof=1) / np.sqrt(k)) if k > 1 else float("nan")


def _spectral_pair(cfg, backend, i):
    t = spectral_trial(cfg, backend, i)
    return t.lam_max, t.rho


def spectral_run(cfg: SpectralConfig, backend: Backend = "hd", threads: int = 1) -> SpectralResult:
    """Per-trial ``(lambda_max, rho(xi, x_1))`` over ``cfg.trials`` trials."""
    out = np.array(_map_trials(partial(_spectral_pair, cfg, backend), cfg.trials, threads))
    return SpectralResult(cfg, backend, out[:, 0], out[:, 1])


def config_dict(cfg) -> dict:
    return asdict(cfg)
