"""Algebraic and statistical checks of the lazy operators, plus timing benches.

Three harnesses live here:

* :func:`consistency_suite` probes one operator and checks that every answer
  is consistent with a single fixed matrix (repeat probes, linearity over
  the probed span, the adjoint identity ``<z, Q x> = <Q^* z, x>``), plus an
  isometry check for orthogonal ensembles and an exact first-probe formula
  for the two base operators.
* :func:`equivalence_suite` runs a fixture under both backends with
  independent randomness and compares scalar statistics with two-sample KS
  tests.
* :func:`scaling_bench` times ISTA runs and fits a log-log slope.
"""

from __future__ import annotations

import gc
import os
import time
import warnings
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from .base import LinearProbeOperator, Side
from .ensembles import Backend, EnsembleSpec, build_operator
from .experiments import IstaConfig, _map_trials, ista_trial, trial_sources
from .ginibre import HDGinibre
from .haar import HDHaar
from .randsrc import RandomSource
from .reflect import apply, apply_adjoint, make_reflector

RTOL = 1e-10


# ----------------------------------------------------------------- KS tests


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of one two-sample KS comparison.

    ``significance`` is the level the p-value was compared against (already
    Bonferroni-corrected when produced by :func:`equivalence_suite`).
    """

    statistic: str
    n_a: int
    n_b: int
    ks: float
    pvalue: float
    significance: float
    attempt: int = 1

    @property
    def passed(self) -> bool:
        return self.pvalue >= self.significance

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.statistic}: D={self.ks:.4f} p={self.pvalue:.3g} "
                f"(level {self.significance:.2g}, n={self.n_a}/{self.n_b}, attempt {self.attempt})")


def two_sample_ks(a, b, significance: float = 1e-3, name: str = "statistic") -> EquivalenceReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    res = stats.ks_2samp(a, b, method="asymp")
    p = float(np.clip(res.pvalue, 0.0, 1.0))
    return EquivalenceReport(name, a.size, b.size, float(res.statistic), p, float(significance))


# -------------------------------------------------------- consistency suite


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tol: float
    count: int

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol


@dataclass
class ConsistencyReport:
    label: str
    probes: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            verdict = "PASS" if c.passed else "FAIL"
            out.append(f"{verdict} {self.label} {c.name}: worst {c.worst:.2e} (tol {c.tol:.0e}, {c.count} checks)")
        return out


class _Tally:
    def __init__(self):
        self.worst: dict[str, float] = {}
        self.count: dict[str, int] = {}

    def add(self, name: str, err: float) -> None:
        err = float(err) if np.isfinite(err) else np.inf
        self.worst[name] = max(self.worst.get(name, 0.0), err)
        self.count[name] = self.count.get(name, 0) + 1


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b), np.finfo(float).tiny)
    return np.linalg.norm(a - b) / scale


def _schedule(budget: int) -> list[tuple[str, Side]]:
    head = [("new", "right"), ("new", "right"), ("repeat", "right"), ("combo", "right"),
            ("new", "left"), ("new", "left"), ("repeat", "left"), ("combo", "left")]
    if budget <= len(head):
        return head[:budget]
    extra = budget - len(head) - 2
    middle = [("new", "right" if i % 2 == 0 else "left") for i in range(max(extra, 0))]
    tail = [("repeat", "right"), ("repeat", "left")][: budget - len(head)]
    return head + middle + tail


def _expected_first_probe(op: LinearProbeOperator, x: np.ndarray) -> np.ndarray | None:
    """Closed form of the very first right probe for the base lazy operators.

    The first right probe of HDGinibre returns ``sigma ||x|| g`` and that of
    HDHaar returns ``||x|| g / ||g||``, where ``g`` is the first normal draw
    of the operator's source.  Returns None when the source has already been
    drawn from, since the draw can then not be replayed.
    """
    if not isinstance(op, (HDGinibre, HDHaar)):
        return None
    src = op.source
    replay = RandomSource(src.seed, src.stream, src.field)
    if replay.generator.bit_generator.state != src.generator.bit_generator.state:
        return None
    if isinstance(op, HDGinibre):
        return op.sigma * np.linalg.norm(x) * replay.normal(op.shape[0])
    g = replay.normal(op.n)
    return np.linalg.norm(x) * g / np.linalg.norm(g)


def reflector_suite(cases: int = 1000, nmax: int = 512, seed: int = 0,
                    field: str = "real") -> ConsistencyReport:
    """Algebraic checks of ``H_k(p)`` on random ``(n, k, p)`` cases.

    Checks the zeroed tail (``1e-10 ||p||``), the image ``H p = ||p_tail|| e_k``
    on coordinate ``k``, norm preservation and the round trip ``H^* H x = x``
    (both ``1e-12`` relative).  Every fifth case has a zero pivot ``p[k-1]``.
    """
    rng = np.random.default_rng(seed)
    cplx = field == "complex"
    tally = _Tally()
    eps = np.finfo(float).tiny
    for i in range(cases):
        n = int(rng.integers(1, nmax + 1))
        k = int(rng.integers(1, n + 1))
        p = rng.standard_normal(n) + (1j * rng.standard_normal(n) if cplx else 0)
        if i % 5 == 0:
            p[k - 1] = 0
        x = rng.standard_normal(n) + (1j * rng.standard_normal(n) if cplx else 0)
        h = make_reflector(p, k)
        hp = apply(h, p)
        pn = np.linalg.norm(p)
        tn = np.linalg.norm(p[k - 1:])
        tally.add("zero-tail", np.max(np.abs(hp[k:]), initial=0.0) / max(pn, eps))
        tally.add("pivot-image", abs(hp[k - 1] - tn) / max(pn, eps))
        hx = apply(h, x)
        xn = np.linalg.norm(x)
        tally.add("norm", abs(np.linalg.norm(hx) - xn) / xn)
        tally.add("round-trip", np.linalg.norm(apply_adjoint(h, hx) - x) / xn)
    tols = {"zero-tail": 1e-10, "pivot-image": 1e-12, "norm": 1e-12, "round-trip": 1e-12}
    rep = ConsistencyReport(f"reflector-{field}", 0)
    for name, tol in tols.items():
        rep.checks.append(CheckResult(name, tally.worst[name], tol, tally.count[name]))
    return rep


def consistency_suite(op: LinearProbeOperator, probes: int = 10, seed: int = 0,
                      isometry: bool | None = None, label: str | None = None,
                      rtol: float = RTOL) -> ConsistencyReport:
    """Probe ``op`` up to ``probes`` times and check it behaves as one fixed matrix.

    Parameters
    ----------
    op : LinearProbeOperator
        Fresh operator; it is consumed by the suite.
    probes : int
        Probe count, capped by the operator budget.
    seed : int
        Seed of the test vectors (independent of the operator's own randomness).
    isometry : bool, optional
        Also check ``||Q x|| = ||x||``; defaults to True for :class:`HDHaar`.

    The first right test vector has a zero leading entry, which exercises the
    ``sign(0)`` convention of the first reflector.
    """
    if isometry is None:
        isometry = isinstance(op, HDHaar)
    budget = probes if op.remaining is None else min(probes, op.remaining)
    rng = np.random.default_rng(seed)
    cplx = np.issubdtype(op.dtype, np.complexfloating)

    def vec(length: int) -> np.ndarray:
        v = rng.standard_normal(length)
        if cplx:
            v = v + 1j * rng.standard_normal(length)
        return v

    pairs: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {"right": [], "left": []}
    tally = _Tally()
    a, b = 0.7, -1.3

    for kind, side in _schedule(budget):
        own = pairs[side]
        if kind == "repeat" and own:
            x = own[0][0]
        elif kind == "combo" and len(own) >= 2:
            x = a * own[0][0] + b * own[1][0]
        else:
            kind = "new"
            x = vec(op.input_dim(side))
            if side == "right" and not own:
                x[0] = 0
        expect = _expected_first_probe(op, x) if side == "right" and not pairs["right"] else None
        y = op.probe(x, side)
        if expect is not None:
            tally.add("first-probe formula", _rel(y, expect))
        if kind == "repeat":
            tally.add("repeat-probe", _rel(y, own[0][1]))
        elif kind == "combo":
            tally.add("span-linearity", _rel(y, a * own[0][1] + b * own[1][1]))
        else:
            own.append((x, y))
        if isometry:
            nx = np.linalg.norm(x)
            tally.add("isometry", abs(np.linalg.norm(y) - nx) / nx)
        for xr, yr in pairs["right"]:
            for zl, wl in pairs["left"]:
                lhs, rhs = np.vdot(zl, yr), np.vdot(wl, xr)
                scale = max(np.linalg.norm(zl) * np.linalg.norm(yr),
                            np.linalg.norm(wl) * np.linalg.norm(xr), np.finfo(float).tiny)
                tally.add("adjoint-bilinear", abs(lhs - rhs) / scale)

    rep = ConsistencyReport(label or type(op).__name__, budget)
    for name in tally.worst:
        rep.checks.append(CheckResult(name, tally.worst[name], rtol, tally.count[name]))
    return rep


# -------------------------------------------------------- equivalence suite


@dataclass(frozen=True)
class Fixture:
    """A randomized computation reduced to a few scalar statistics.

    ``sample(backend, seed, trial)`` returns one value per entry of ``stats``;
    it is a module-level partial so trials can run in worker processes.
    """

    name: str
    stats: tuple[str, ...]
    sample: Callable[[Backend, int, int], Sequence[float]]


def _ista_stats(cfg: IstaConfig, backend: Backend, seed: int, trial: int) -> list[float]:
    res = ista_trial(replace(cfg, seed=seed), backend, trial)
    return [res.mse[-1], res.x_final[0], res.x_final[1]]


def ista_fixture(n: int = 64, m: int | None = 32, T: int = 15, ensemble: str = "ginibre") -> Fixture:
    """ISTA with the default lasso parameters; statistics ``e^(T)``, ``x_T[0]``, ``x_T[1]``."""
    cfg = IstaConfig(n=n, m=m if ensemble == "ginibre" else None, T=T, ensemble=ensemble)
    return Fixture(f"ista-{ensemble}-{cfg.rows}x{n}-T{T}", ("e_T", "x_T[0]", "x_T[1]"),
                   partial(_ista_stats, cfg))


def _haar_probe_stats(n: int, backend: Backend, seed: int, trial: int) -> list[float]:
    _, mat_src = trial_sources(seed, backend, trial)
    Q = build_operator(EnsembleSpec("haar", n), backend, mat_src)
    e1 = np.zeros(n)
    e1[0] = 1.0
    y = Q.probe(e1, "right")
    return [y[0], y[1], y.sum() / np.sqrt(n)]


def haar_probe_fixture(n: int = 32) -> Fixture:
    """First column ``Q e_1`` of a Haar matrix: two coordinates and a fixed projection."""
    return Fixture(f"haar-column-{n}", ("y[0]", "y[1]", "<y,1>/sqrt(n)"), partial(_haar_probe_stats, n))


def _collect(fixture: Fixture, backend: Backend, seed: int, trials: int, threads: int) -> np.ndarray:
    fn = partial(fixture.sample, backend, seed)
    return np.asarray(_map_trials(fn, trials, threads), dtype=float)


def equivalence_suite(fixture: Fixture, trials: int = 10_000, significance: float = 1e-3,
                      seed: int = 0, reference: Fixture | None = None, threads: int = 1,
                      retry: bool = True) -> list[EquivalenceReport]:
    """Compare ``fixture`` under the hd backend with ``reference`` (default: the same fixture) under direct.

    Each statistic is tested at ``significance / len(stats)``.  When any
    test fails and ``retry`` is set, the whole comparison is repeated once
    with seed ``seed + 1`` and that attempt is reported.
    """
    ref = reference or fixture
    if ref.stats != fixture.stats:
        raise ValueError("fixture and reference must report the same statistics")
    level = significance / len(fixture.stats)
    reports: list[EquivalenceReport] = []
    for attempt in (1, 2) if retry else (1,):
        s = seed + attempt - 1
        a = _collect(fixture, "hd", s, trials, threads)
        b = _collect(ref, "direct", s, trials, threads)
        reports = [replace(two_sample_ks(a[:, j], b[:, j], level, f"{fixture.name} {name}"), attempt=attempt)
                   for j, name in enumerate(fixture.stats)]
        if all(r.passed for r in reports):
            break
    return reports


# ------------------------------------------------------------------ timing


@dataclass(frozen=True)
class BenchRow:
    backend: str
    n: int
    T: int
    median_ms: float


@dataclass
class BenchResult:
    """Timing table and the least-squares slope of ``log(time)`` on ``log(variable)``."""

    variable: str
    rows: list[BenchRow]
    slope: float

    def summary(self) -> str:
        backend = self.rows[0].backend if self.rows else "?"
        lo = min(getattr(r, self.variable) for r in self.rows)
        hi = max(getattr(r, self.variable) for r in self.rows)
        return f"{backend}: log-log slope of time vs {self.variable} over [{lo}, {hi}] = {self.slope:.3f}"


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def system_load() -> float | None:
    try:
        return os.getloadavg()[0]
    except (AttributeError, OSError):
        return None


def time_ista(backend: Backend, n: int, T: int, repeats: int = 5, seed: int = 0) -> float:
    """Median wall time (seconds) of one ISTA trial; trials ``0..repeats-1`` are timed."""
    cfg = IstaConfig(n=n, T=T, seed=seed)
    times = []
    enabled = gc.isenabled()
    gc.disable()
    try:
        for k in range(repeats):
            t0 = time.perf_counter()
            ista_trial(cfg, backend, k)
            times.append(time.perf_counter() - t0)
    finally:
        if enabled:
            gc.enable()
    return float(np.median(times))


def scaling_bench(backend: Backend = "hd", dims: Sequence[int] = (4096,), T: int | Sequence[int] = 50,
                  repeats: int = 5, seed: int = 0, load_limit: float = 1.5) -> BenchResult:
    """Time ISTA over a grid of ``n`` (fixed ``T``) or of ``T`` (single ``n``).

    BLAS is pinned to one thread and one untimed warm-up run precedes the
    measurements.  A warning is issued when the 1-minute load average
    exceeds ``load_limit``.
    """
    dims = [int(d) for d in dims]
    Ts = [int(T)] if np.isscalar(T) else [int(t) for t in T]
    if len(dims) > 1 and len(Ts) > 1:
        raise ValueError("vary either the dimension or T, not both")
    load = system_load()
    if load is not None and load > load_limit:
        warnings.warn(f"system load {load:.2f} exceeds {load_limit}; timings may be noisy", RuntimeWarning)
    rows = []
    with threadpool_limits(limits=1):
        ista_trial(IstaConfig(n=min(dims), T=min(Ts)), backend, 0)
        for n in dims:
            for t in Ts:
                rows.append(BenchRow(backend, n, t, 1e3 * time_ista(backend, n, t, repeats, seed)))
    variable = "T" if len(Ts) > 1 else "n"
    x = [getattr(r, variable) for r in rows]
    slope = loglog_slope(x, [r.median_ms for r in rows]) if len(rows) > 1 else float("nan")
    return BenchResult(variable, rows, slope)


# ------------------------------------------------------------ canned suites


def contract_operators(seed: int, field: str = "real") -> list[tuple[str, LinearProbeOperator]]:
    """One fresh instance of each lazy ensemble at dims <= 128, each on its own stream."""
    from .ensembles import GOEOperator, SubsampledHaarOperator, USVOperator

    src = lambda k: RandomSource(seed, (7, k), field)  # noqa: E731
    return [
        ("ginibre-64x48", HDGinibre(64, 48, 0.3, src(0))),
        ("haar-64", HDHaar(64, src(1))),
        ("goe-48", GOEOperator(48, src(2))),
        ("usv-40x56", USVOperator(40, 56, np.linspace(0.5, 2.0, 40), src(3))),
        ("subsampled-haar-48x96", SubsampledHaarOperator(48, 96, src(4))),
    ]


def run_consistency(seeds: int = 100, probes: int = 20, fields: Sequence[str] = ("real", "complex"),
                    reflector_cases: int = 1000) -> list[ConsistencyReport]:
    """Reflector algebra plus the operator contract for every lazy ensemble over ``seeds`` seeds.

    Reports are merged per ``(ensemble, field)`` keeping the worst error.
    """
    out = []
    if reflector_cases:
        out = [reflector_suite(reflector_cases, field=f, seed=i) for i, f in enumerate(fields)]
    merged: dict[str, ConsistencyReport] = {}
    for field_ in fields:
        for seed in range(seeds):
            for name, op in contract_operators(seed, field_):
                rep = consistency_suite(op, probes, seed, label=f"{name}-{field_}")
                acc = merged.setdefault(rep.label, ConsistencyReport(rep.label, rep.probes))
                by_name = {c.name: c for c in acc.checks}
                for c in rep.checks:
                    old = by_name.get(c.name)
                    by_name[c.name] = c if old is None else CheckResult(
                        c.name, max(old.worst, c.worst), c.tol, old.count + c.count)
                acc.checks = list(by_name.values())
    return out + list(merged.values())


def equivalence_fixtures() -> list[Fixture]:
    """Ginibre ISTA (64 x 32 design), Haar ISTA (32) and a Haar column probe, all at ``T = 15``."""
    return [ista_fixture(64, 32, 15, "ginibre"), ista_fixture(32, None, 15, "haar"), haar_probe_fixture(32)]


def run_equivalence(trials: int = 10_000, significance: float = 1e-3, seed: int = 0,
                    threads: int = 1) -> list[EquivalenceReport]:
    out = []
    for fx in equivalence_fixtures():
        out.extend(equivalence_suite(fx, trials, significance, seed, threads=threads))
    return out
